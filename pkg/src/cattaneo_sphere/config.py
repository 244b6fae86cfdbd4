"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment, sections are dotted key
prefixes (``physics.tau = 0.1``).  Every problem in a file is collected and
reported together, each with its line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .constitutive import PhysParams, affine
from .dynamics import ModelVariant
from .errors import ConfigurationError
from .grid import RadialGrid
from .integrator import SCHEMES, StepControl


class ConfigParseError(ConfigurationError):
    """All problems found in one configuration; ``errors`` lists them."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _bool(text):
    v = text.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _int(text):
    f = float(text)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(f)


def _opt_float(text):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _floats(text):
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _ints(text):
    return [_int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _pairs(text):
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            mu, lam = item.split(":", 1)
            out.append((float(mu), float(lam)))
        else:
            out.append((float(item), float(item)))
    return out


def _str(text):
    return text.strip()


# key -> (parser, default)
SCHEMA: Dict[str, Tuple] = {
    "variant": (_str, "RELAXED"),
    "geometry.r_min": (float, 1.0),
    "geometry.r_max": (float, 2.0),
    "geometry.n": (_int, 512),
    "physics.Cv": (float, 1.0),
    "physics.R": (float, 1.0),
    "physics.tau": (float, 0.1),
    "physics.mu": (float, 0.1),
    "physics.lambda": (float, 0.1),
    "physics.g_slope": (float, 0.0),
    "physics.h_slope": (float, 0.0),
    "physics.l_slope": (float, 0.0),
    "physics.kappa_slope": (float, 0.0),
    "initial.generator": (_str, "perturbation"),
    "initial.amplitude": (float, 0.01),
    "initial.mode": (_int, 1),
    "initial.well_prepared": (_bool, True),
    "initial.defect": (float, 0.0),
    "control.cfl": (float, 0.4),
    "control.dt_max": (float, 0.01),
    "control.t_end": (float, 5.0),
    "control.output_every": (float, 0.05),
    "control.scheme": (_str, "IMEX"),
    "control.picard_iters": (_int, 2),
    "control.newton_tol": (float, 1e-10),
    "control.art_diss": (float, 0.5),
    "control.fixed_dt": (_opt_float, None),
    "output.dir": (_str, "out"),
    "output.snapshots": (_bool, False),
    "sweep.taus": (_floats, [0.1, 0.05, 0.025, 0.0125]),
    "sweep.epsilons": (_pairs, [(1e-2, 1e-2), (5e-3, 5e-3), (2.5e-3, 2.5e-3)]),
    "sweep.t_end": (float, 1.0),
    "sweep.defect": (float, 0.0),
    "mms.family": (_str, "trig"),
    "mms.refinements": (_ints, [128, 256, 512]),
    "mms.t_end": (float, 0.1),
    "mms.min_order": (float, 1.7),
    "mms.break_stencil": (_bool, False),
}

GENERATORS = ("perturbation", "equilibrium")


@dataclass
class RunConfig:
    values: Dict[str, object] = field(default_factory=lambda: {k: d for k, (_, d) in SCHEMA.items()})
    lines: Dict[str, int] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def variant(self) -> ModelVariant:
        return ModelVariant.parse(self.values["variant"])

    def grid(self) -> RadialGrid:
        v = self.values
        return RadialGrid(v["geometry.r_min"], v["geometry.r_max"], v["geometry.n"])

    def params(self) -> PhysParams:
        v = self.values
        return PhysParams(
            Cv=v["physics.Cv"],
            R=v["physics.R"],
            tau=v["physics.tau"],
            mu=v["physics.mu"],
            lam=v["physics.lambda"],
            g=affine(v["physics.g_slope"]),
            h=affine(v["physics.h_slope"]),
            l=affine(v["physics.l_slope"]),
            kappa=affine(v["physics.kappa_slope"]),
        )

    def control(self, **overrides) -> StepControl:
        v = self.values
        kw = dict(
            cfl=v["control.cfl"],
            dt_max=v["control.dt_max"],
            t_end=v["control.t_end"],
            output_every=v["control.output_every"],
            scheme=v["control.scheme"],
            picard_iters=v["control.picard_iters"],
            newton_tol=v["control.newton_tol"],
            art_diss=v["control.art_diss"],
            fixed_dt=v["control.fixed_dt"],
        )
        kw.update(overrides)
        return StepControl(**kw)

    def initial_state(self, grid=None, params=None, defect=None):
        from .state import RadialState, perturbation_data

        grid = grid or self.grid()
        params = params or self.params()
        v = self.values
        if v["initial.generator"] == "equilibrium" or v["initial.amplitude"] == 0:
            return RadialState.equilibrium(grid)
        return perturbation_data(
            grid,
            v["initial.amplitude"],
            v["initial.mode"],
            params,
            well_prepared=v["initial.well_prepared"],
            defect=v["initial.defect"] if defect is None else defect,
        )

    def with_values(self, **changes):
        vals = dict(self.values)
        for k, val in changes.items():
            vals[k.replace("__", ".")] = val
        return RunConfig(vals, dict(self.lines))


def _where(cfg, *keys):
    parts = []
    for k in keys:
        line = cfg.lines.get(k)
        parts.append(f"{k} (line {line})" if line else f"{k} (default)")
    return " and ".join(parts)


def _validate(cfg: RunConfig, errors: List[str]):
    v = cfg.values

    def bad(keys, msg):
        errors.append(f"{_where(cfg, *keys)}: {msg}")

    try:
        variant = ModelVariant.parse(v["variant"])
    except ConfigurationError as exc:
        bad(["variant"], str(exc))
        variant = None
    if v["geometry.n"] < 5:
        bad(["geometry.n"], f"must be an integer >= 5, got {v['geometry.n']}")
    if v["geometry.r_min"] < 1.0:
        bad(["geometry.r_min"], "must be >= 1")
    if not v["geometry.r_max"] > v["geometry.r_min"]:
        bad(["geometry.r_max", "geometry.r_min"], "outer radius must exceed inner radius")
    for k in ("physics.Cv", "physics.R"):
        if not v[k] > 0:
            bad([k], "must be positive")
    for k in ("physics.tau", "physics.mu", "physics.lambda"):
        if v[k] < 0:
            bad([k], "must be non-negative")
    if variant is ModelVariant.NSF and v["physics.tau"] > 0:
        bad(["variant", "physics.tau"], "variant NSF requires tau = 0")
    if variant in (ModelVariant.RELAXED, ModelVariant.EULER_CC) and not v["physics.tau"] > 0:
        bad(["variant", "physics.tau"], f"variant {variant.name} requires tau > 0")
    if variant is ModelVariant.EULER_CC and (v["physics.mu"] > 0 or v["physics.lambda"] > 0):
        bad(["variant", "physics.mu", "physics.lambda"], "variant EULER_CC requires mu = lambda = 0")
    if variant is ModelVariant.RELAXED and v["physics.mu"] == 0 and v["physics.lambda"] == 0:
        bad(["variant", "physics.mu", "physics.lambda"], "variant RELAXED needs a positive viscosity; use EULER_CC")
    if v["initial.generator"] not in GENERATORS:
        bad(["initial.generator"], f"must be one of {GENERATORS}")
    if v["initial.amplitude"] < 0:
        bad(["initial.amplitude"], "must be non-negative")
    if v["initial.mode"] < 1:
        bad(["initial.mode"], "must be >= 1")
    if not 0 < v["control.cfl"] <= 1:
        bad(["control.cfl"], "must lie in (0, 1]")
    for k in ("control.dt_max", "control.output_every", "control.newton_tol"):
        if not v[k] > 0:
            bad([k], "must be positive")
    if v["control.t_end"] < 0:
        bad(["control.t_end"], "must be non-negative")
    if v["control.scheme"] not in SCHEMES:
        bad(["control.scheme"], f"must be one of {SCHEMES}")
    if v["control.picard_iters"] < 1:
        bad(["control.picard_iters"], "must be >= 1")
    if v["control.art_diss"] < 0:
        bad(["control.art_diss"], "must be non-negative")
    if v["control.fixed_dt"] is not None and not v["control.fixed_dt"] > 0:
        bad(["control.fixed_dt"], "must be positive")
    taus = v["sweep.taus"]
    if not taus or any(t <= 0 for t in taus):
        bad(["sweep.taus"], "must be a non-empty list of positive values")
    elif any(b >= a for a, b in zip(taus, taus[1:])):
        bad(["sweep.taus"], "must be strictly decreasing")
    eps = v["sweep.epsilons"]
    if not eps or any(m < 0 or l < 0 for m, l in eps):
        bad(["sweep.epsilons"], "must be a non-empty list of non-negative mu:lambda pairs")
    elif any(m == 0 and l == 0 for m, l in eps):
        bad(["sweep.epsilons"], "zero viscosity is the EULER_CC reference, not a RELAXED sweep member")
    elif any(b[0] + b[1] >= a[0] + a[1] for a, b in zip(eps, eps[1:])):
        bad(["sweep.epsilons"], "must decrease toward zero")
    if v["sweep.t_end"] <= 0:
        bad(["sweep.t_end"], "must be positive")
    if not v["mms.refinements"] or any(n < 5 for n in v["mms.refinements"]):
        bad(["mms.refinements"], "must list cell counts >= 5")
    if v["mms.t_end"] <= 0:
        bad(["mms.t_end"], "must be positive")
    for k, val in v.items():
        if isinstance(val, float) and not math.isfinite(val):
            bad([k], "must be finite")


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises :class:`ConfigParseError` listing every problem."""
    cfg = RunConfig()
    errors: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in cfg.lines:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {cfg.lines[key]})")
            continue
        parser = SCHEMA[key][0]
        try:
            cfg.values[key] = parser(val)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: cannot parse {val!r} ({exc})")
            continue
        cfg.lines[key] = lineno
    _validate(cfg, errors)
    if errors:
        raise ConfigParseError(errors)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config_text():
    """The full key table with defaults, as a config file."""
    out = []
    for key, (_, default) in SCHEMA.items():
        if isinstance(default, list):
            if default and isinstance(default[0], tuple):
                default = ", ".join(f"{a:g}:{b:g}" for a, b in default)
            else:
                default = ", ".join(f"{x:g}" for x in default)
        out.append(f"{key} = {default}")
    return "\n".join(out) + "\n"
