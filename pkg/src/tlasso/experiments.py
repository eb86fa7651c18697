"""Seeded trial sweeps validating the error-decay and sample-complexity
behavior of the constrained recovery program, with frozen CSV schemas.

Trial summaries use medians: the guarantees being checked are
high-probability statements about typical trials, and medians are robust to
the occasional diverged solve.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import InvalidSpecError, NumericalFailureError
from .geometry import translated_local_width_mc
from .links import LinkFunction, NonlinearityParams, link_params, parse_link
from .model import InstanceSpec, derive_seed, generate_instance
from .sets import ConstraintSet, parse_set
from .solver import SolveOptions, error_split, solve_tlasso

SWEEP_KINDS = ("error_vs_m", "phase_diagram", "t_sweep", "corruption_sweep")

# Frozen CSV schemas; the plotting frontend keys off these exact columns.
# Wall time is kept on the in-memory rows only: a timing column would break
# the byte-identical re-run guarantee.
ROW_COLUMNS = ["sweep_kind", "m", "n", "s", "k", "trial", "seed", "mu", "sigma",
               "psi_hat", "joint_error", "signal_error", "corruption_error",
               "iterations", "converged"]
PHASE_COLUMNS = ["m", "axis", "axis_value", "success_rate", "trials"]
TSWEEP_COLUMNS = ["t", "omega_t", "omega_t_se", "bound_proxy", "achieved_error"]


class FitUndefinedError(NumericalFailureError):
    """Log-log fit requested in an exact-recovery regime (zero median error)."""


@dataclass(frozen=True)
class SweepConfig:
    kind: str
    m_grid: tuple[int, ...]
    n: int
    s: int
    k: int
    amplitude: float
    link: LinkFunction
    set_x: str = "l1:auto"
    set_v: str = "l1:auto"
    radius_scale: float = 1.0
    trials: int = 10
    base_seed: int = 0
    out: str = ""
    max_iters: int = 20_000
    grad_map_tol: float = 1e-8
    axis: str = "s"                         # phase diagrams: sweep s or k
    axis_grid: tuple[int, ...] = ()
    success_frac: float = 0.1
    t_grid: tuple[float, ...] = ()
    width_trials: int = 500
    k_grid: tuple[int, ...] = ()            # corruption sweeps

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise InvalidSpecError(f"unknown sweep kind {self.kind!r}")
        if not self.m_grid or any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise InvalidSpecError("m grid must be nonempty and strictly increasing")
        if self.trials < 1:
            raise InvalidSpecError("need at least one trial")
        if self.radius_scale < 1.0:
            raise InvalidSpecError("radius_scale below 1 makes the anchor infeasible")
        if self.axis not in ("s", "k"):
            raise InvalidSpecError("phase axis must be 's' or 'k'")


@dataclass(frozen=True)
class SweepRow:
    sweep_kind: str
    m: int
    n: int
    s: int
    k: int
    trial: int
    seed: int
    mu: float
    sigma: float
    psi_hat: float
    joint_error: float
    signal_error: float
    corruption_error: float
    iterations: int
    converged: bool
    wall_time: float = field(default=0.0, compare=False)

    def csv_values(self) -> list:
        return [self.sweep_kind, self.m, self.n, self.s, self.k, self.trial, self.seed,
                f"{self.mu:.17g}", f"{self.sigma:.17g}", f"{self.psi_hat:.17g}",
                f"{self.joint_error:.17g}", f"{self.signal_error:.17g}",
                f"{self.corruption_error:.17g}", self.iterations, int(self.converged)]


def resolve_set(grammar: str, anchor: np.ndarray, scale: float) -> ConstraintSet:
    """Instantiate a set grammar string against a realized anchor vector.

    The radius token 'auto' resolves to the anchor's own norm times the
    scale factor (boundary anchor at scale 1, interior above); a zero anchor
    degenerates to the singleton at the origin.
    """
    dim = len(anchor)
    if ":auto" in grammar:
        head = grammar.split(":", 1)[0]
        if head == "l1":
            radius = float(np.sum(np.abs(anchor))) * scale
        elif head == "l2":
            radius = float(np.linalg.norm(anchor)) * scale
        else:
            raise InvalidSpecError(f"auto radius unsupported for {head!r}")
        if radius == 0.0:
            return ConstraintSet("singleton", anchor=tuple(np.zeros(dim)))
        return ConstraintSet(head + "_ball", radius=radius, dim=dim)
    return parse_set(grammar, dim=dim)


def _run_cell(config: SweepConfig, m: int, s: int, k: int, trial: int,
              params: NonlinearityParams) -> SweepRow:
    seed = derive_seed(config.base_seed, m, s, k, trial)
    spec = InstanceSpec(n=config.n, m=m, s=s, k=k,
                        corruption_amplitude=config.amplitude, link=config.link, seed=seed)
    inst = generate_instance(spec)
    set_x = resolve_set(config.set_x, params.mu * inst.x_star, config.radius_scale)
    set_v = resolve_set(config.set_v, inst.v_star, config.radius_scale)
    opts = SolveOptions(max_iters=config.max_iters, grad_map_tol=config.grad_map_tol,
                        trace_objective=False)
    t0 = time.perf_counter()
    result = solve_tlasso(inst, set_x, set_v, opts)
    wall = time.perf_counter() - t0
    sig, cor = error_split(result, inst, params)
    return SweepRow(sweep_kind=config.kind, m=m, n=config.n, s=s, k=k, trial=trial,
                    seed=seed, mu=params.mu, sigma=params.sigma, psi_hat=params.psi_hat,
                    joint_error=float(np.hypot(sig, cor)), signal_error=sig,
                    corruption_error=cor, iterations=result.iterations,
                    converged=result.converged, wall_time=wall)


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    """error_vs_m / corruption_sweep trial grid; deterministic given base seed."""
    params = link_params(config.link)
    rows = []
    if config.kind == "corruption_sweep":
        if len(config.m_grid) != 1:
            raise InvalidSpecError("corruption sweep uses a single m")
        k_grid = config.k_grid or (config.k,)
        for k in k_grid:
            for trial in range(config.trials):
                rows.append(_run_cell(config, config.m_grid[0], config.s, k, trial, params))
        return rows
    for m in config.m_grid:
        for trial in range(config.trials):
            rows.append(_run_cell(config, m, config.s, config.k, trial, params))
    return rows


def median_errors(rows: list[SweepRow]) -> dict[int, float]:
    by_m: dict[int, list[float]] = {}
    for r in rows:
        by_m.setdefault(r.m, []).append(r.joint_error)
    return {m: float(np.median(v)) for m, v in sorted(by_m.items())}


def scaling_fit(rows: list[SweepRow]) -> tuple[float, float, float]:
    """(exponent, intercept, r2) of log median joint error against log m."""
    med = median_errors(rows)
    if len(med) < 3:
        raise InvalidSpecError("scaling fit needs at least 3 distinct m values")
    if any(v <= 0 for v in med.values()):
        raise FitUndefinedError("zero median error: exact-recovery regime, log fit undefined")
    lx = np.log(np.array(list(med.keys()), dtype=float))
    ly = np.log(np.array(list(med.values())))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def phase_diagram(config: SweepConfig) -> list[dict]:
    """Success-rate grid over (m, s) or (m, k) cells."""
    params = link_params(config.link)
    axis_grid = config.axis_grid or ((config.s,) if config.axis == "s" else (config.k,))
    cells = []
    for m in config.m_grid:
        for val in axis_grid:
            s = val if config.axis == "s" else config.s
            k = val if config.axis == "k" else config.k
            successes = 0
            for trial in range(config.trials):
                row = _run_cell(config, m, s, k, trial, params)
                spec_seed = row.seed
                inst = generate_instance(InstanceSpec(n=config.n, m=m, s=s, k=k,
                                                      corruption_amplitude=config.amplitude,
                                                      link=config.link, seed=spec_seed))
                threshold = config.success_frac * float(
                    np.hypot(params.mu, np.linalg.norm(inst.v_star)))
                if row.joint_error <= threshold:
                    successes += 1
            cells.append({"m": m, "axis": config.axis, "axis_value": val,
                          "success_rate": successes / config.trials,
                          "trials": config.trials})
    return cells


def t_sweep(config: SweepConfig) -> tuple[list[dict], float]:
    """Local-width bound proxy versus achieved error over a grid of t.

    Needs an interior anchor (radius_scale > 1) so the plain tangent cone is
    full dimensional. Returns the per-t rows and the implied constant
    C_hat = median achieved error / min_t bound proxy.
    """
    if not config.t_grid:
        raise InvalidSpecError("t sweep needs a t grid")
    if config.radius_scale <= 1.0:
        raise InvalidSpecError("t sweep needs an interior anchor (radius_scale > 1)")
    if len(config.m_grid) != 1:
        raise InvalidSpecError("t sweep uses a single m")
    m = config.m_grid[0]
    params = link_params(config.link)

    rows = [_run_cell(config, m, config.s, config.k, trial, params)
            for trial in range(config.trials)]
    achieved = float(np.median([r.joint_error for r in rows]))

    # geometry of one representative trial's constraint set, translated to its anchor
    seed = derive_seed(config.base_seed, m, config.s, config.k, 0)
    inst = generate_instance(InstanceSpec(n=config.n, m=m, s=config.s, k=config.k,
                                          corruption_amplitude=config.amplitude,
                                          link=config.link, seed=seed))
    set_x = resolve_set(config.set_x, params.mu * inst.x_star, config.radius_scale)
    set_v = resolve_set(config.set_v, inst.v_star, config.radius_scale)
    tset = ConstraintSet("product", factors=(set_x.with_dim(config.n), set_v.with_dim(m)))
    center = np.concatenate([params.mu * inst.x_star, inst.v_star])

    out = []
    for t in config.t_grid:
        w = translated_local_width_mc(tset, center, t, config.width_trials,
                                      derive_seed(config.base_seed, 99, m))
        proxy = t + w.mean * (params.sigma + params.psi_hat + params.mu) / (t * np.sqrt(m))
        out.append({"t": t, "omega_t": w.mean, "omega_t_se": w.std_error,
                    "bound_proxy": proxy, "achieved_error": achieved})
    c_hat = achieved / min(r["bound_proxy"] for r in out)
    return out, c_hat


def write_rows_csv(rows: list[SweepRow], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROW_COLUMNS)
        for r in rows:
            writer.writerow(r.csv_values())


def write_dict_csv(records: list[dict], columns: list[str], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            writer.writerow([rec[c] if not isinstance(rec[c], float) else f"{rec[c]:.17g}"
                             for c in columns])


def write_manifest(path: str, config: SweepConfig, wall_time: float, extra: dict | None = None):
    payload = {
        "config": {k: (v.spec_string() if isinstance(v, LinkFunction) else v)
                   for k, v in vars(config).items()},
        "library_version": __version__,
        "wall_time_s": wall_time,
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=list)
        fh.write("\n")


def parse_config_file(path: str, overrides: dict | None = None) -> SweepConfig:
    """Plain key=value config; CLI flag overrides win."""
    raw: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidSpecError(f"bad config line {line!r}")
            key, val = line.split("=", 1)
            raw[key.strip()] = val.strip()
    raw.update(overrides or {})
    return config_from_strings(raw)


def config_from_strings(raw: dict[str, str]) -> SweepConfig:
    def ints(v):
        return tuple(int(x) for x in str(v).split(",") if str(x).strip())

    def floats(v):
        return tuple(float(x) for x in str(v).split(",") if str(x).strip())

    try:
        return SweepConfig(
            kind=raw.get("kind", "error_vs_m"),
            m_grid=ints(raw["m_grid"]),
            n=int(raw["n"]),
            s=int(raw.get("s", 1)),
            k=int(raw.get("k", 0)),
            amplitude=float(raw.get("amplitude", 1.0)),
            link=parse_link(raw.get("link", "identity")),
            set_x=raw.get("set_x", "l1:auto"),
            set_v=raw.get("set_v", "l1:auto"),
            radius_scale=float(raw.get("radius_scale", 1.0)),
            trials=int(raw.get("trials", 10)),
            base_seed=int(raw.get("seed", 0)),
            out=raw.get("out", ""),
            max_iters=int(raw.get("max_iters", 20_000)),
            grad_map_tol=float(raw.get("grad_map_tol", 1e-8)),
            axis=raw.get("axis", "s"),
            axis_grid=ints(raw.get("axis_grid", "")),
            success_frac=float(raw.get("success_frac", 0.1)),
            t_grid=floats(raw.get("t_grid", "")),
            width_trials=int(raw.get("width_trials", 500)),
            k_grid=ints(raw.get("k_grid", "")),
        )
    except (KeyError, ValueError) as exc:
        raise InvalidSpecError(f"bad sweep config: {exc}") from exc
