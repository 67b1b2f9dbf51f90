"""Run configuration: JSON schema (versioned), validation and problem construction."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ansatz import ProblemParams, build_problem, validate_alpha
from .discretization import Coefficient, Domain
from .errors import ConfigurationError

SCHEMA_VERSION = 1

DEFAULTS = {
    "version": SCHEMA_VERSION,
    "domain": {"kind": "disc", "radius": 1.0, "center": [0.0, 0.0]},
    "coefficient": {"family": "constant", "value": 1.0},
    "alpha": 0.5,
    "m": 0,
    "t": 6.0,
    "t_grid": None,
    "q": [0.0, 0.0],
    "d": 0.6,
    "h_field": {"kind": "zero"},
    "n": 256,
    "solver": {"kind": "direct", "tol": 1e-10},
    "alpha_hat": None,
    "sigma": None,
    "R0": 10.0,
    "cutoff": "quintic",
    "xi": None,
    "corrections": "exact",
    "residual": "discrete",
    "inner": {"method": "fixed_point", "tol": 1e-10, "maxiter": 50},
    "newton": {"tol": 1e-8, "maxiter": 30},
    "landscape": {"radius_factor": 1.0, "phase": 0.0, "barrier": 1e-4, "warm_start": True, "maxfev": 400},
    "resolution_factor": 4.0,
}


def _fail(field, message):
    raise ConfigurationError(f"{field}: {message}")


def _point(value, field):
    try:
        arr = np.asarray(value, dtype=float).ravel()
    except (TypeError, ValueError):
        _fail(field, "must be a pair of numbers")
    if arr.size != 2 or not np.all(np.isfinite(arr)):
        _fail(field, "must be a pair of finite numbers")
    return [float(arr[0]), float(arr[1])]


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("config: must be a JSON object")
        version = raw.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            _fail("version", f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})")
        unknown = sorted(set(raw) - set(DEFAULTS))
        if unknown:
            _fail(unknown[0], "unknown field")
        data = _merge(DEFAULTS, raw)
        cls._validate(data)
        return cls(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config: invalid JSON ({exc})") from exc
        return cls.from_dict(raw)

    @staticmethod
    def _validate(d):
        try:
            validate_alpha(d["alpha"])
        except ConfigurationError as exc:
            _fail("alpha", f"{exc}; the weight exponent must lie in (-1, inf) minus the positive integers")
        except (TypeError, ValueError):
            _fail("alpha", "must be a number")
        if not isinstance(d["m"], int) or isinstance(d["m"], bool) or d["m"] < 0:
            _fail("m", "must be a non-negative integer")
        if d["t_grid"] is not None:
            ts = d["t_grid"]
            if not isinstance(ts, list) or not ts or any(not isinstance(v, (int, float)) or v <= 0 for v in ts):
                _fail("t_grid", "must be a non-empty list of positive numbers")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                _fail("t_grid", "must be strictly increasing")
        if not isinstance(d["t"], (int, float)) or d["t"] <= 0:
            _fail("t", "must be positive")
        d["q"] = _point(d["q"], "q")
        if not isinstance(d["d"], (int, float)) or d["d"] <= 0:
            _fail("d", "must be positive")
        if not isinstance(d["n"], int) or d["n"] < 16:
            _fail("n", "must be an integer >= 16")
        dom = d["domain"]
        if dom.get("kind") == "disc":
            if not dom.get("radius", 0) > 0:
                _fail("domain.radius", "must be positive")
            dom["center"] = _point(dom.get("center", [0, 0]), "domain.center")
        elif dom.get("kind") == "rectangle":
            lo = _point(dom.get("lower"), "domain.lower")
            hi = _point(dom.get("upper"), "domain.upper")
            if not (hi[0] > lo[0] and hi[1] > lo[1]):
                _fail("domain.upper", "must exceed domain.lower componentwise")
        else:
            _fail("domain.kind", "must be 'disc' or 'rectangle'")
        fam = d["coefficient"].get("family")
        if fam not in ("constant", "exp_x1", "gaussian_bump"):
            _fail("coefficient.family", "must be 'constant', 'exp_x1' or 'gaussian_bump'")
        hk = d["h_field"].get("kind")
        if hk not in ("zero", "constant", "eigen"):
            _fail("h_field.kind", "must be 'zero', 'constant' or 'eigen'")
        if d["solver"].get("kind") not in ("direct", "cg"):
            _fail("solver.kind", "must be 'direct' or 'cg'")
        if d["cutoff"] not in ("quintic", "cosine"):
            _fail("cutoff", "must be 'quintic' or 'cosine'")
        if d["corrections"] not in ("exact", "leading"):
            _fail("corrections", "must be 'exact' or 'leading'")
        if d["residual"] not in ("discrete", "analytic"):
            _fail("residual", "must be 'discrete' or 'analytic'")
        if d["inner"].get("method") not in ("fixed_point", "newton"):
            _fail("inner.method", "must be 'fixed_point' or 'newton'")
        if d["R0"] is None or d["R0"] <= 0:
            _fail("R0", "must be positive")
        if d["xi"] is not None:
            pts = d["xi"]
            if not isinstance(pts, list) or len(pts) != d["m"]:
                _fail("xi", f"must list exactly m = {d['m']} points")
            d["xi"] = [_point(p, f"xi[{i}]") for i, p in enumerate(pts)]
        if d["alpha_hat"] is not None:
            lim = min(float(d["alpha"]), -2.0 / 3.0)
            if not -1.0 < d["alpha_hat"] < lim:
                _fail("alpha_hat", f"must lie in (-1, {lim:.6g})")
        if d["sigma"] is not None and not d["sigma"] > 0:
            _fail("sigma", "must be positive")

    def to_dict(self):
        return copy.deepcopy(self.data)

    def __getitem__(self, key):
        return self.data[key]

    @property
    def t_values(self):
        return list(self.data["t_grid"]) if self.data["t_grid"] else [float(self.data["t"])]

    def domain(self) -> Domain:
        dom = self.data["domain"]
        if dom["kind"] == "disc":
            return Domain.disc(dom["radius"], tuple(dom["center"]))
        return Domain.rectangle(tuple(dom["lower"]), tuple(dom["upper"]))

    def coefficient(self) -> Coefficient:
        c = dict(self.data["coefficient"])
        fam = c.pop("family")
        if fam == "constant":
            return Coefficient.constant(c.get("value", 1.0))
        if fam == "exp_x1":
            return Coefficient.exp_x1(c.get("c", 1.0))
        return Coefficient.gaussian_bump(c.get("amplitude", 0.5), tuple(c.get("center", (0.0, 0.0))),
                                         c.get("width", 0.5), c.get("width_y"))

    def h_args(self):
        h = self.data["h_field"]
        if h["kind"] == "zero":
            return None, 0.0
        if h["kind"] == "constant":
            return float(h.get("value", 0.0)), 0.0
        return None, float(h.get("scale", 1.0))

    def problem(self, t=None) -> ProblemParams:
        d = self.data
        h_field, h_eig = self.h_args()
        return build_problem(
            self.domain(), self.coefficient(), d["n"], d["alpha"], q=tuple(d["q"]), d=d["d"],
            h_field=h_field, h_eigen_scale=h_eig, t=self.t_values[0] if t is None else t, m=d["m"],
            solver=d["solver"]["kind"], solver_tol=d["solver"]["tol"], alpha_hat=d["alpha_hat"],
            sigma=d["sigma"], R0=d["R0"], cutoff=d["cutoff"],
        )
