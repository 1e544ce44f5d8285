"""Run configuration: JSON ingestion, validation, and object builders.

The config file is a JSON document with five blocks (all optional, with
defaults): "geometry", "physics", "numerics", "study", "output".  Unknown
keys anywhere are rejected.  See the README for the full documented
grammar.  Every report embeds the SHA-256 hash of the canonicalized
config so that artifacts are traceable and byte-reproducible.
"""

import hashlib
import json

import numpy as np

from .errors import ConfigError
from .fields import ViscosityModel
from .geometry import build_unit_cell, tile_domain
from .macro import MacroParams
from .micro import MicroParams, smooth_phase, uniform_phase
from .stepper import SourceModel

CONFIG_VERSION = 1

_SCHEMA = {
    "geometry": {"dim", "shape", "r", "n_y", "m"},
    "physics": {"lam", "lambda_eps", "lambda_rule", "nu", "source", "force",
                "phi0", "u0", "seed"},
    "numerics": {"dt", "T_end", "S0", "tol", "n_macro", "snapshot_times"},
    "study": {"eps_list"},
    "output": {"dir"},
}

_DEFAULTS = {
    "geometry": {"dim": 2, "shape": "disk", "r": 0.25, "n_y": 32, "m": 4},
    "physics": {"lam": 1.0, "lambda_eps": None, "lambda_rule": "lam-plus-eps",
                "nu": 1.0, "source": {"type": "linear", "c": 1.0},
                "force": None,
                "phi0": {"type": "uniform", "value": 0.5}, "u0": None,
                "seed": 0},
    "numerics": {"dt": 0.005, "T_end": 0.5, "S0": 2.0, "tol": 1e-10,
                 "n_macro": 64, "snapshot_times": []},
    "study": {"eps_list": [0.5, 0.25, 0.125]},
    "output": {"dir": "out"},
}


class RunConfig:
    """Validated configuration with canonical hash."""

    def __init__(self, data=None):
        data = {} if data is None else data
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - set(_SCHEMA)
        if unknown:
            raise ConfigError(f"unknown config blocks: {sorted(unknown)}")
        self.blocks = {}
        for block, allowed in _SCHEMA.items():
            given = data.get(block, {})
            if not isinstance(given, dict):
                raise ConfigError(f"config block {block!r} must be an object")
            extra = set(given) - allowed
            if extra:
                raise ConfigError(
                    f"unknown keys in {block!r}: {sorted(extra)}")
            merged = json.loads(json.dumps(_DEFAULTS[block]))
            merged.update(given)
            self.blocks[block] = merged
        self._validate()

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls(data)

    def __getitem__(self, block):
        return self.blocks[block]

    def _validate(self):
        g = self.blocks["geometry"]
        if g["dim"] != 2:
            raise ConfigError("only dim=2 is supported")
        if g["shape"] not in ("disk", "empty"):
            raise ConfigError(f"unknown inclusion shape {g['shape']!r}")
        if not (0.0 <= g["r"] < 0.5):
            raise ConfigError("inclusion radius must satisfy 0 <= r < 0.5")
        if not (isinstance(g["n_y"], int) and g["n_y"] >= 8
                and g["n_y"] % 2 == 0):
            raise ConfigError("n_y must be an even integer >= 8")
        if not (isinstance(g["m"], int) and g["m"] >= 1):
            raise ConfigError("m must be a positive integer")

        p = self.blocks["physics"]
        if p["lam"] < 0:
            raise ConfigError("lam must be nonnegative")
        if p["lambda_eps"] is not None and p["lambda_eps"] <= 0:
            raise ConfigError("lambda_eps must be positive")
        if p["lambda_rule"] not in ("lam-plus-eps", "fixed"):
            raise ConfigError(f"unknown lambda_rule {p['lambda_rule']!r}")
        if p["nu"] <= 0:
            raise ConfigError("nu must be positive")
        src = p["source"]
        if not isinstance(src, dict) or src.get("type") not in ("linear",
                                                                "bounded"):
            raise ConfigError("source must be {'type': 'linear'|'bounded', ...}")
        if src["type"] == "bounded":
            c1, c2 = src.get("c1", 0.5), src.get("c2", 2.0)
            if not (0 < c1 <= c2):
                raise ConfigError("bounded source needs 0 < c1 <= c2")
        if p["force"] is not None:
            f = p["force"]
            if not (isinstance(f, (list, tuple)) and len(f) == 2):
                raise ConfigError("force must be a pair [gx, gy]")
        phi0 = p["phi0"]
        if not isinstance(phi0, dict) or phi0.get("type") not in ("uniform",
                                                                  "smooth",
                                                                  "modes"):
            raise ConfigError(
                "phi0 must be {'type': 'uniform'|'smooth'|'modes', ...}")

        n = self.blocks["numerics"]
        if n["dt"] <= 0 or n["T_end"] <= 0:
            raise ConfigError("dt and T_end must be positive")
        c2 = self.source_model().c2
        if n["dt"] * c2 > 0.5:
            raise ConfigError("dt too large for the source: need dt*c2 <= 0.5")
        if n["S0"] < 0:
            raise ConfigError("S0 must be nonnegative")
        if not (isinstance(n["n_macro"], int) and n["n_macro"] >= 4):
            raise ConfigError("n_macro must be an integer >= 4")

        s = self.blocks["study"]
        eps = s["eps_list"]
        if not isinstance(eps, list) or not eps:
            raise ConfigError("study eps_list must be a nonempty list")
        for e in eps:
            if not (0 < e <= 1) or abs(round(1.0 / e) - 1.0 / e) > 1e-12:
                raise ConfigError(f"eps={e} must be a reciprocal integer")
        if sorted(eps, reverse=True) != eps or len(set(eps)) != len(eps):
            raise ConfigError("eps_list must be strictly decreasing")

    # ------------------------------------------------------------------
    def canonical_json(self):
        return json.dumps(self.blocks, sort_keys=True, separators=(",", ":"))

    def hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    # ------------------------------------------------------------------
    # builders
    # ------------------------------------------------------------------
    def unit_cell(self, n_y=None):
        g = self.blocks["geometry"]
        r = 0.0 if g["shape"] == "empty" else g["r"]
        return build_unit_cell(g["dim"], "disk", r,
                               n_y if n_y is not None else g["n_y"])

    def domain(self, m=None):
        return tile_domain(self.unit_cell(),
                           m if m is not None else self.blocks["geometry"]["m"])

    def source_model(self):
        src = self.blocks["physics"]["source"]
        if src["type"] == "linear":
            return SourceModel.linear(src.get("c", 1.0))
        return SourceModel.bounded(src.get("c1", 0.5), src.get("c2", 2.0))

    def viscosity(self):
        return ViscosityModel.isotropic(self.blocks["physics"]["nu"])

    def lambda_eps(self, eps):
        p = self.blocks["physics"]
        if p["lambda_eps"] is not None:
            return float(p["lambda_eps"])
        if p["lambda_rule"] == "fixed":
            return max(float(p["lam"]), eps)
        lam = float(p["lam"])
        return lam + eps if lam > 0 else eps

    def force(self):
        f = self.blocks["physics"]["force"]
        return None if f is None else (float(f[0]), float(f[1]))

    def micro_params(self, eps, seed=None):
        n = self.blocks["numerics"]
        return MicroParams(
            lambda_eps=self.lambda_eps(eps),
            A=self.viscosity(),
            source=self.source_model(),
            force=self.force(),
            dt=n["dt"], T_end=n["T_end"], S0=n["S0"],
        )

    def macro_params(self, tensors):
        n = self.blocks["numerics"]
        return MacroParams(
            lam=float(self.blocks["physics"]["lam"]),
            tensors=tensors,
            source=self.source_model(),
            force=self.force(),
            dt=n["dt"], T_end=n["T_end"], S0=n["S0"],
        )

    def initial_phase(self, grid, seed=None):
        p = self.blocks["physics"]["phi0"]
        if p["type"] == "uniform":
            return uniform_phase(grid, p.get("value", 0.5))
        if p["type"] == "smooth":
            s = self.blocks["physics"]["seed"] if seed is None else seed
            return smooth_phase(grid, amplitude=p.get("amplitude", 0.5),
                                kmax=p.get("kmax", 3), seed=s)
        # "modes": fixed deterministic macroscopic profile
        X, Y = grid.cell_centers()
        mean = p.get("mean", 0.5)
        terms = p.get("terms",
                      [[0.2, -1, -1], [0.15, 1, 0], [0.1, 0, 1]])
        phi = np.full_like(X, float(mean))
        for amp, kx, ky in terms:
            term = np.ones_like(X) * amp
            if kx:
                term = term * (np.sin(np.pi * kx * X) if kx > 0
                               else np.cos(np.pi * (-kx) * X))
            if ky:
                term = term * (np.sin(np.pi * ky * Y) if ky > 0
                               else np.cos(np.pi * (-ky) * Y))
            phi += term
        return np.where(grid.mask, phi, 0.0)
