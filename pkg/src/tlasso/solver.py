"""Projected gradient solver for the constrained recovery program.

Minimizes g(x, v) = 1/2 ||y - Phi x - sqrt(m) v||_2^2 over (x, v) in
S_x x S_v. The squared loss shares its minimizers with the plain l2 loss over
the feasible set and is smooth, so a fixed 1/L step gives monotone descent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError, NumericalFailureError
from .links import NonlinearityParams
from .model import ProblemInstance, residual, rng_from
from .sets import ConstraintSet, project


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 100_000
    grad_map_tol: float = 1e-8      # scaled by sqrt(m) inside the solver
    step_rule: str = "inverse_lipschitz"   # or "fixed"
    fixed_step: float = 0.0
    power_iters: int = 50
    trace_objective: bool = True

    def __post_init__(self):
        if self.max_iters < 1 or self.grad_map_tol <= 0:
            raise InvalidSpecError("invalid solver options")
        if self.step_rule not in ("inverse_lipschitz", "fixed"):
            raise InvalidSpecError(f"unknown step rule {self.step_rule!r}")
        if self.step_rule == "fixed" and not self.fixed_step > 0:
            raise InvalidSpecError("fixed step rule needs a positive step")


@dataclass(frozen=True)
class SolveResult:
    x_hat: np.ndarray
    v_hat: np.ndarray
    iterations: int
    final_residual_norm: float
    objective_trace: list[float] = field(repr=False)
    converged: bool = True


def lipschitz_estimate(inst: ProblemInstance, iters: int = 50) -> float:
    """Power-iteration bound on lambda_max(Phi Phi^T + m I), inflated by 1%.

    The extended Gram operator acts on R^m as r -> Phi Phi^T r + m r, so its
    top eigenvalue is sigma_max(Phi)^2 + m.
    """
    if iters < 10:
        raise InvalidSpecError("power iteration needs at least 10 iterations")
    m = inst.m
    rng = rng_from(inst.seed, 0x9E3779B9)
    r = rng.standard_normal(m)
    r /= np.linalg.norm(r)
    lam = 0.0
    for _ in range(iters):
        z = inst.phi @ (inst.phi.T @ r) + m * r
        nrm = np.linalg.norm(z)
        if not np.isfinite(nrm) or nrm <= 0:
            raise NumericalFailureError("power iteration produced a degenerate iterate")
        lam = float(r @ z)
        r = z / nrm
    if not np.isfinite(lam) or lam <= 0:
        raise NumericalFailureError("power iteration failed to produce a positive eigenvalue")
    return lam * 1.01


def solve_tlasso(inst: ProblemInstance, set_x: ConstraintSet, set_v: ConstraintSet,
                 opts: SolveOptions = SolveOptions()) -> SolveResult:
    """Projected gradient descent from the projected origin."""
    set_x = set_x.with_dim(inst.n) if set_x.dim is None else set_x
    set_v = set_v.with_dim(inst.m) if set_v.dim is None else set_v
    if set_x.dim != inst.n or set_v.dim != inst.m:
        raise InvalidSpecError("constraint-set dimensions do not match the instance")

    sqm = np.sqrt(inst.m)
    if opts.step_rule == "inverse_lipschitz":
        eta = 1.0 / lipschitz_estimate(inst, opts.power_iters)
    else:
        eta = opts.fixed_step
    tol = opts.grad_map_tol * sqm

    x = project(set_x, np.zeros(inst.n))
    v = project(set_v, np.zeros(inst.m))
    r = residual(inst, x, v)
    trace = [0.5 * float(r @ r)] if opts.trace_objective else []

    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        gx = -(inst.phi.T @ r)
        gv = -sqm * r
        x_new = project(set_x, x - eta * gx)
        v_new = project(set_v, v - eta * gv)
        step = np.sqrt(np.linalg.norm(x_new - x) ** 2 + np.linalg.norm(v_new - v) ** 2)
        x, v = x_new, v_new
        r = inst.y - inst.phi @ x - sqm * v
        if opts.trace_objective:
            trace.append(0.5 * float(r @ r))
        if step / eta < tol:
            converged = True
            break

    return SolveResult(x_hat=x, v_hat=v, iterations=it,
                       final_residual_norm=float(np.linalg.norm(r)),
                       objective_trace=trace, converged=converged)


def joint_error(result: SolveResult, inst: ProblemInstance, params: NonlinearityParams) -> float:
    """sqrt(||x_hat - mu x*||^2 + ||v_hat - v*||^2), the theorem error metric."""
    return float(np.sqrt(np.linalg.norm(result.x_hat - params.mu * inst.x_star) ** 2
                         + np.linalg.norm(result.v_hat - inst.v_star) ** 2))


def error_split(result: SolveResult, inst: ProblemInstance,
                params: NonlinearityParams) -> tuple[float, float]:
    """(signal error, corruption error) components of the joint error."""
    return (float(np.linalg.norm(result.x_hat - params.mu * inst.x_star)),
            float(np.linalg.norm(result.v_hat - inst.v_star)))
