"""Experiment drivers behind the command line: single runs, sweeps, MMS."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .config import RunConfig
from .dynamics import ModelVariant, continuum_rhs
from .errors import SimulationAborted
from .functionals import DiagnosticsSink, rate_fit, solution_distance, wellprep_measure
from .grid import RadialGrid, weighted_L2
from .integrator import RunReport, run, stable_dt
from .manufactured import get_family
from .state import RadialState


def thread_cap(n_jobs):
    """Worker count for sweeps, capped by ``CATTANEO_THREADS`` when set."""
    env = os.environ.get("CATTANEO_THREADS", "").strip()
    cap = int(env) if env.isdigit() and int(env) > 0 else 1
    return max(1, min(cap, n_jobs))


@dataclass
class RunResult:
    label: str
    variant: ModelVariant
    sink: DiagnosticsSink
    report: RunReport
    final: Optional[RadialState] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


def run_member(label, initial, grid, params, variant, control, keep_states=True):
    sink = DiagnosticsSink(grid, params, variant, eps_art=control.eps_art(variant), keep_states=keep_states)
    try:
        final, report = run(initial, grid, params, variant, control, sink)
        return RunResult(label, variant, sink, report, final)
    except SimulationAborted as exc:
        return RunResult(label, variant, sink, exc.report or RunReport(), None, str(exc))


def run_members(jobs):
    """Run ``(label, initial, grid, params, variant, control)`` jobs, possibly in threads."""
    workers = thread_cap(len(jobs))
    if workers == 1:
        return [run_member(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: run_member(*job), jobs))


def simulate(cfg: RunConfig):
    grid, params = cfg.grid(), cfg.params()
    variant = cfg.variant
    control = cfg.control()
    initial = cfg.initial_state(grid, params)
    keep = bool(cfg["output.snapshots"])
    return run_member("simulate", initial, grid, params, variant, control, keep_states=keep)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    kind: str
    parameters: List[float]
    dt: float
    members: List[RunResult]
    reference: RunResult
    rows: List[Dict[str, float]] = field(default_factory=list)
    final: Dict[str, List[float]] = field(default_factory=dict)
    fits: Dict[str, tuple] = field(default_factory=dict)
    header: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return self.reference.ok and all(m.ok for m in self.members)


def _pair_states(a: RunResult, b: RunResult):
    bt = {round(s.t, 9): s for s in b.sink.states}
    for s in a.sink.states:
        other = bt.get(round(s.t, 9))
        if other is not None:
            yield s, other


def _fit_or_nan(pairs):
    pairs = [(p, d) for p, d in pairs if np.isfinite(d)]
    if len(pairs) < 3:
        return (float("nan"), float("nan"))
    return rate_fit(pairs)


def sweep_tau(cfg: RunConfig, taus=None) -> SweepResult:
    """Relaxed runs for each tau against a Fourier-law reference.

    All runs share the initial density, velocity and temperature and one
    step size, the CFL estimate of the smallest tau.  The initial heat flux
    is well prepared up to ``sweep.defect * sqrt(tau)`` in the preparedness
    measure.
    """
    taus = list(taus or cfg["sweep.taus"])
    grid, base = cfg.grid(), cfg.params()
    t_end = cfg["sweep.t_end"]
    c = cfg["sweep.defect"]
    inits = [cfg.initial_state(grid, base.replace(tau=tau), defect=c * math.sqrt(tau)) for tau in taus]
    probe = cfg.control(t_end=t_end)
    dt = stable_dt(inits[-1], grid, base.replace(tau=min(taus)), ModelVariant.RELAXED, probe)
    control = cfg.control(t_end=t_end, fixed_dt=dt)
    jobs = [(f"tau={tau:g}", init, grid, base.replace(tau=tau), ModelVariant.RELAXED, control) for tau, init in zip(taus, inits)]
    jobs.append(("NSF", inits[0], grid, base.replace(tau=0.0), ModelVariant.NSF, control))
    results = run_members(jobs)
    members, ref = results[:-1], results[-1]
    out = SweepResult("tau", taus, dt, members, ref)
    out.header = [
        f"step size {dt:.17g} shared by all runs",
        "velocity distance order capped at 2",
        "dist_rho_theta: interior H2 distance of (rho, theta); dist_u: interior H2 distance of u",
        "dist_q: interior H2 distance of q to the reference Fourier flux; q_defect: weighted H1 norm of q + kappa theta_r",
    ]
    for tau, m in zip(taus, members):
        p = base.replace(tau=tau)
        for a, b in _pair_states(m, ref):
            out.rows.append({
                "tau": tau,
                "t": a.t,
                "dist_rho_theta": solution_distance(a, b, grid, 2, fields=("rho", "theta")),
                "dist_u": solution_distance(a, b, grid, 2, fields=("u",)),
                "dist_q": solution_distance(a, b, grid, 2, fields=("q",), params=p, fourier_flux=True),
                "q_defect": wellprep_measure(a, grid, p),
            })
    for key in ("dist_rho_theta", "dist_u", "dist_q", "q_defect"):
        vals = []
        for tau in taus:
            at_end = [row[key] for row in out.rows if row["tau"] == tau and abs(row["t"] - t_end) < 1e-9]
            vals.append(at_end[0] if at_end else float("nan"))
        out.final[key] = vals
        out.fits[key] = _fit_or_nan(zip(taus, vals))
    return out


def sweep_viscosity(cfg: RunConfig, epsilons=None) -> SweepResult:
    """Relaxed runs for decreasing (mu, lambda) against the inviscid reference."""
    eps = list(epsilons or cfg["sweep.epsilons"])
    grid, base = cfg.grid(), cfg.params()
    t_end = cfg["sweep.t_end"]
    init = cfg.initial_state(grid, base)
    probe = cfg.control(t_end=t_end)
    dt = stable_dt(init, grid, base, ModelVariant.RELAXED, probe)
    control = cfg.control(t_end=t_end, fixed_dt=dt)
    jobs = [(f"mu={m:g},lambda={l:g}", init, grid, base.replace(mu=m, lam=l), ModelVariant.RELAXED, control) for m, l in eps]
    jobs.append(("EULER_CC", init, grid, base.replace(mu=0.0, lam=0.0), ModelVariant.EULER_CC, control))
    results = run_members(jobs)
    members, ref = results[:-1], results[-1]
    scale = [m + l for m, l in eps]
    out = SweepResult("viscosity", scale, dt, members, ref)
    out.header = [
        f"step size {dt:.17g} shared by all runs",
        f"reference artificial dissipation {ref.report.art_diss:g}",
        "eps = mu + lambda; dist: interior H2 distance of (rho, u, theta, q)",
    ]
    for (m_, l_), s, mem in zip(eps, scale, members):
        for a, b in _pair_states(mem, ref):
            out.rows.append({"mu": m_, "lambda": l_, "eps": s, "t": a.t, "dist": solution_distance(a, b, grid, 2)})
    vals = []
    for s in scale:
        at_end = [row["dist"] for row in out.rows if row["eps"] == s and abs(row["t"] - t_end) < 1e-9]
        vals.append(at_end[0] if at_end else float("nan"))
    out.final["dist"] = vals
    out.fits["dist"] = _fit_or_nan(zip(scale, vals))
    return out


# ---------------------------------------------------------------------------
# manufactured solutions


@dataclass
class MmsResult:
    refinements: List[int]
    errors: Dict[str, List[float]]
    orders: Dict[str, List[float]]
    min_order: float
    fields: List[str]

    @property
    def passed(self):
        return all(o >= self.min_order for f in self.fields for o in self.orders[f])


def mms_forcing(exact, grid: RadialGrid, params, variant):
    """Source term that makes ``exact`` a solution of the continuum system."""
    r = grid.nodes

    def forcing(t):
        f = exact.evaluate(r, t)
        dt_exact = np.stack([f["rho_t"], f["u_t"], f["theta_t"], f["q_t"]])
        src = dt_exact - continuum_rhs(f, r, params, variant)
        if variant is ModelVariant.NSF:
            src[3] = 0.0
        return src

    return forcing


def mms_error(cfg: RunConfig, n, stencil_scale=1.0):
    """Weighted L2 error of each field at ``mms.t_end`` on an ``n``-cell grid."""
    from .integrator import StepControl

    variant = cfg.variant
    grid = RadialGrid(cfg["geometry.r_min"], cfg["geometry.r_max"], n)
    params = variant.effective_params(cfg.params())
    exact = get_family(cfg["mms.family"], grid.r_min, grid.r_max)
    t_end = cfg["mms.t_end"]
    f0 = exact.evaluate(grid.nodes, 0.0)
    init = RadialState(f0["rho"], f0["u"], f0["theta"], f0["q"], 0.0)
    base = cfg.control()
    control = StepControl(cfl=base.cfl, dt_max=base.dt_max, t_end=t_end, output_every=t_end,
                          art_diss=base.art_diss, stencil_scale=stencil_scale)
    final, _ = run(init, grid, params, variant, control, forcing=mms_forcing(exact, grid, params, variant))
    fe = exact.evaluate(grid.nodes, final.t)
    names = ["rho", "u", "theta"] + (["q"] if variant.has_flux_equation else [])
    return {k: weighted_L2(getattr(final, k) - fe[k], 2, grid) for k in names}


def mms_study(cfg: RunConfig, refinements=None, break_stencil=None) -> MmsResult:
    refinements = list(refinements or cfg["mms.refinements"])
    broken = cfg["mms.break_stencil"] if break_stencil is None else break_stencil
    scale = 1.25 if broken else 1.0
    errs = [mms_error(cfg, n, stencil_scale=scale) for n in refinements]
    names = list(errs[0])
    errors = {k: [e[k] for e in errs] for k in names}
    orders = {}
    for k in names:
        orders[k] = [
            math.log(errors[k][i] / errors[k][i + 1]) / math.log(refinements[i + 1] / refinements[i])
            for i in range(len(refinements) - 1)
        ]
    return MmsResult(refinements, errors, orders, cfg["mms.min_order"], names)
