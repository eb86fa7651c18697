"""Monte Carlo estimators for Gaussian width, complexity, local width, and
descent-cone geometry, plus the empirical restricted-singular-value check.

All estimators report a standard error next to the mean; none of them return
bare numbers. Per-draw suprema are computed in closed form where the set
allows it and by a one-dimensional dual search otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError, UnboundedSetError
from .model import ProblemInstance, rng_from
from .sets import ConstraintSet, contains, project

_DUAL_BISECT_STEPS = 64


@dataclass(frozen=True)
class WidthEstimate:
    mean: float
    std_error: float
    trials: int
    quantity: str                  # width | complexity | local_width
    t: float | None = None

    def __post_init__(self):
        if self.std_error < 0 or self.trials < 1:
            raise InvalidSpecError("invalid width estimate")


@dataclass(frozen=True)
class ConeSample:
    """Unit directions sampled from the tangent cone of T at base_point."""
    base_point: np.ndarray
    directions: np.ndarray         # (num, dim), rows unit norm


def _require_dim(cset: ConstraintSet) -> int:
    if cset.dim is None:
        raise InvalidSpecError("set needs an explicit dim for width estimation")
    return cset.dim


def sup_linear(cset: ConstraintSet, g: np.ndarray) -> float:
    """sup_{x in set} <g, x>, closed form per kind; unbounded kinds raise."""
    if cset.kind == "l1_ball":
        return cset.radius * float(np.max(np.abs(g)))
    if cset.kind == "l2_ball":
        return cset.radius * float(np.linalg.norm(g))
    if cset.kind == "singleton":
        return float(g @ np.array(cset.anchor))
    if cset.kind == "product":
        a, b = cset.factors
        return sup_linear(a, g[: a.dim]) + sup_linear(b, g[a.dim:])
    raise UnboundedSetError(f"{cset.kind} has unbounded Gaussian width")


def _l1_capped_sup(radius: float, t: float, g: np.ndarray) -> float:
    """sup <g, x> over the l1 ball of given radius intersected with t B2."""
    a = np.abs(g)
    nrm2 = np.linalg.norm(g)
    if nrm2 == 0.0:
        return 0.0
    if radius <= t:
        return radius * float(np.max(a))
    if t * np.sum(a) / nrm2 <= radius:
        return t * float(nrm2)
    # optimizer is t * soft(g, theta) / ||soft(g, theta)||_2 with theta set so
    # the l1 norm hits the radius; the ratio is decreasing in theta
    lo, hi = 0.0, float(np.max(a))
    for _ in range(_DUAL_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        s = np.maximum(a - mid, 0.0)
        sn = np.linalg.norm(s)
        if sn == 0.0 or t * np.sum(s) / sn <= radius:
            hi = mid
        else:
            lo = mid
    s = np.maximum(a - hi, 0.0)
    sn = np.linalg.norm(s)
    if sn == 0.0:
        return t * float(np.max(a))
    x = t * s / sn
    scale = min(1.0, radius / np.sum(x)) if np.sum(x) > 0 else 1.0
    return float(a @ x) * scale


def _product_capped_sup(cset: ConstraintSet, t: float, g: np.ndarray) -> float:
    """Dual search on the l2 multiplier: block argmaxes are projections of g/lam."""
    def point(lam: float) -> np.ndarray:
        blocks = []
        off = 0
        for f in cset.factors:
            blocks.append(project(f, g[off: off + f.dim] / lam))
            off += f.dim
        return np.concatenate(blocks)

    lam = 1e-12
    x = point(lam)
    if np.linalg.norm(x) <= t:
        return float(g @ x)
    lam_hi = max(np.linalg.norm(g) / t, 1e-9)
    for _ in range(200):
        if np.linalg.norm(point(lam_hi)) <= t:
            break
        lam_hi *= 2.0
    lo = lam
    for _ in range(_DUAL_BISECT_STEPS):
        mid = 0.5 * (lo + lam_hi)
        if np.linalg.norm(point(mid)) > t:
            lo = mid
        else:
            lam_hi = mid
    x = point(lam_hi)
    nrm = np.linalg.norm(x)
    if nrm > t > 0:
        x = x * (t / nrm)   # star-shaped blocks stay feasible under shrinkage
    return float(g @ x)


def capped_sup(cset: ConstraintSet, t: float, g: np.ndarray) -> float:
    """sup <g, x> over set intersected with the l2 ball of radius t."""
    if t <= 0:
        raise InvalidSpecError("local width needs t > 0")
    if cset.kind == "full_space":
        return t * float(np.linalg.norm(g))
    if cset.kind == "l2_ball":
        return min(cset.radius, t) * float(np.linalg.norm(g))
    if cset.kind == "top_k":
        a2 = np.sort(np.abs(g))[::-1][: cset.k]
        return t * float(np.linalg.norm(a2))
    if cset.kind == "singleton":
        anchor = np.array(cset.anchor)
        if np.linalg.norm(anchor) > t + 1e-12:
            raise InvalidSpecError("singleton outside the t-ball is not star shaped")
        return float(g @ anchor)
    if cset.kind == "l1_ball":
        return _l1_capped_sup(cset.radius, t, g)
    return _product_capped_sup(cset, t, g)


def translated_capped_sup(cset: ConstraintSet, t: float, g: np.ndarray,
                          center: np.ndarray) -> float:
    """sup <g, x> over (set - center) intersected with t B2, center feasible.

    Dual search on the l2 multiplier: the inner argmax over the set is the
    projection of center + g/lam. Exact for convex sets; for star-shaped
    translates the final shrink toward the center preserves feasibility.
    """
    if t <= 0:
        raise InvalidSpecError("local width needs t > 0")
    center = np.asarray(center, dtype=float)

    def point(lam: float) -> np.ndarray:
        return project(cset, center + g / lam) - center

    lam = 1e-12
    x = point(lam)
    if np.linalg.norm(x) <= t:
        return float(g @ x)
    lam_hi = max(np.linalg.norm(g) / t, 1e-9)
    for _ in range(200):
        if np.linalg.norm(point(lam_hi)) <= t:
            break
        lam_hi *= 2.0
    lo = lam
    for _ in range(_DUAL_BISECT_STEPS):
        mid = 0.5 * (lo + lam_hi)
        if np.linalg.norm(point(mid)) > t:
            lo = mid
        else:
            lam_hi = mid
    x = point(lam_hi)
    nrm = np.linalg.norm(x)
    if nrm > t > 0:
        x = x * (t / nrm)
    return float(g @ x)


def translated_local_width_mc(cset: ConstraintSet, center: np.ndarray, t: float,
                              trials: int, seed: int) -> WidthEstimate:
    """omega_t(set - center) by Monte Carlo; center must lie in the set."""
    center = np.asarray(center, dtype=float)
    cset = cset.with_dim(len(center))
    if not contains(cset, center, 1e-9):
        raise InvalidSpecError("translation center is not feasible")
    rng = rng_from(seed)
    vals = np.array([translated_capped_sup(cset, t, rng.standard_normal(len(center)), center)
                     for _ in range(trials)])
    return _mc_estimate(vals, "local_width", t=t)


def _mc_estimate(values: np.ndarray, quantity: str, t: float | None = None) -> WidthEstimate:
    n = len(values)
    se = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return WidthEstimate(mean=float(np.mean(values)), std_error=se, trials=n,
                         quantity=quantity, t=t)


def gaussian_width_mc(cset: ConstraintSet, trials: int, seed: int) -> WidthEstimate:
    """omega(S) = E sup_{x in S} <g, x> by Monte Carlo over Gaussian draws."""
    dim = _require_dim(cset)
    rng = rng_from(seed)
    vals = np.array([sup_linear(cset, rng.standard_normal(dim)) for _ in range(trials)])
    return _mc_estimate(vals, "width")


def gaussian_complexity_mc(cset: ConstraintSet, trials: int, seed: int) -> WidthEstimate:
    """gamma(S) = E sup_{x in S} |<g, x>|; sup of the absolute value is the
    larger of the sups along g and -g."""
    dim = _require_dim(cset)
    rng = rng_from(seed)
    vals = np.empty(trials)
    for i in range(trials):
        g = rng.standard_normal(dim)
        vals[i] = max(sup_linear(cset, g), sup_linear(cset, -g))
    return _mc_estimate(vals, "complexity")


def local_gaussian_width_mc(cset: ConstraintSet, t: float, trials: int, seed: int) -> WidthEstimate:
    """omega_t(S) = E sup over S intersected with t B2 of <g, x>."""
    if t <= 0:
        raise InvalidSpecError("local width needs t > 0")
    dim = _require_dim(cset)
    rng = rng_from(seed)
    vals = np.array([capped_sup(cset, t, rng.standard_normal(dim)) for _ in range(trials)])
    return _mc_estimate(vals, "local_width", t=t)


def _product_set(set_x: ConstraintSet, set_v: ConstraintSet) -> ConstraintSet:
    return ConstraintSet("product", factors=(set_x, set_v))


def descent_cone_width_mc(set_x: ConstraintSet, set_v: ConstraintSet,
                          anchor: tuple[np.ndarray, np.ndarray], trials: int, seed: int,
                          iters: int = 200, restarts: int = 5,
                          direction_scale: float = 1e-3) -> WidthEstimate:
    """omega(D cap B2) for the tangent cone D of S_x x S_v at the anchor.

    Per draw, maximizes <g, d> over unit directions d with
    anchor + direction_scale * d feasible, by projected gradient ascent with
    random restarts; small direction_scale makes the feasible direction set
    approach the cone.
    """
    ax, av = (np.asarray(anchor[0], dtype=float), np.asarray(anchor[1], dtype=float))
    set_x = set_x.with_dim(len(ax))
    set_v = set_v.with_dim(len(av))
    if not (contains(set_x, ax, 1e-9) and contains(set_v, av, 1e-9)):
        raise InvalidSpecError("cone anchor is not feasible")
    tset = _product_set(set_x, set_v)
    base = np.concatenate([ax, av])
    dim = len(base)
    eps = direction_scale

    def proj_cone_ball(d: np.ndarray) -> np.ndarray:
        # alternate between the scaled translated set and the unit ball
        for _ in range(3):
            d = (project(tset, base + eps * d) - base) / eps
            nrm = np.linalg.norm(d)
            if nrm > 1.0:
                d = d / nrm
        return d

    rng = rng_from(seed)
    vals = np.empty(trials)
    for i in range(trials):
        g = rng.standard_normal(dim)
        gn = np.linalg.norm(g)
        best = 0.0   # d = 0 is always feasible
        for _ in range(restarts):
            d = proj_cone_ball(rng.standard_normal(dim) / np.sqrt(dim))
            step = 1.0 / max(gn, 1e-12)
            prev = -np.inf
            for _ in range(iters):
                d = proj_cone_ball(d + step * g)
                val = float(g @ d)
                if val <= prev + 1e-12 * max(1.0, abs(prev)):
                    break
                prev = val
            best = max(best, float(g @ proj_cone_ball(d)))
        vals[i] = best
    return _mc_estimate(vals, "width", t=1.0)


def sample_cone_directions(set_x: ConstraintSet, set_v: ConstraintSet,
                           anchor: tuple[np.ndarray, np.ndarray], num: int,
                           seed: int) -> ConeSample:
    """Unit tangent-cone directions d = (u - anchor)/||u - anchor|| for random
    feasible u = project_T(anchor + z), z Gaussian."""
    ax, av = (np.asarray(anchor[0], dtype=float), np.asarray(anchor[1], dtype=float))
    set_x = set_x.with_dim(len(ax))
    set_v = set_v.with_dim(len(av))
    if not (contains(set_x, ax, 1e-9) and contains(set_v, av, 1e-9)):
        raise InvalidSpecError("cone anchor is not feasible")
    tset = _product_set(set_x, set_v)
    base = np.concatenate([ax, av])
    rng = rng_from(seed)
    dirs = []
    while len(dirs) < num:
        z = rng.standard_normal(len(base))
        u = project(tset, base + z)
        d = u - base
        nrm = np.linalg.norm(d)
        if nrm > 1e-10:
            dirs.append(d / nrm)
    return ConeSample(base_point=base, directions=np.vstack(dirs))


def rsv_check(inst: ProblemInstance, cone: ConeSample,
              trials: int) -> tuple[float, tuple[float, float]]:
    """Empirical restricted singular value of [Phi, sqrt(m) I] over the cone
    sample, with the terms of its deviation lower bound.

    Returns (empirical_min, (sqrt(m), gamma_hat)) where gamma_hat is the Monte
    Carlo Gaussian complexity of the sampled sphere-restricted direction set,
    so the caller can report the implied constant (sqrt(m) - min)/gamma_hat.
    """
    if cone.directions.size == 0:
        raise InvalidSpecError("cone sample has no directions")
    n, m = inst.n, inst.m
    if cone.directions.shape[1] != n + m:
        raise InvalidSpecError("cone dimension does not match the instance")
    sqm = np.sqrt(m)
    a = cone.directions[:, :n]
    b = cone.directions[:, n:]
    norms = np.linalg.norm(a @ inst.phi.T + sqm * b, axis=1)
    empirical_min = float(np.min(norms))

    rng = rng_from(inst.seed, 0xC0FFEE)
    g = rng.standard_normal((trials, n + m))
    gamma_hat = float(np.mean(np.max(np.abs(g @ cone.directions.T), axis=1)))
    return empirical_min, (float(sqm), gamma_hat)
