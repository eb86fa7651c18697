"""Constraint-set descriptors and exact Euclidean projections.

The feasible region of the recovery program is a product S_x x S_v of simple
structure sets; everything downstream (the solver, cone sampling, width
estimation) only touches these sets through project/contains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError

_KINDS = ("l1_ball", "l2_ball", "top_k", "full_space", "singleton", "product")


@dataclass(frozen=True)
class ConstraintSet:
    """Projectable structure set.

    dim is the ambient dimension when known; balls and full_space leave it
    None and pick it up from the vectors they are applied to. Product factors
    must carry explicit dims so a stacked vector can be split.
    """

    kind: str
    radius: float = 0.0
    k: int = 0
    anchor: tuple[float, ...] = ()
    factors: tuple["ConstraintSet", "ConstraintSet"] | None = None
    dim: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidSpecError(f"unknown set kind {self.kind!r}")
        if self.kind in ("l1_ball", "l2_ball") and not self.radius > 0:
            raise InvalidSpecError("ball radius must be positive")
        if self.kind == "top_k":
            if self.k < 1:
                raise InvalidSpecError("top_k needs k >= 1")
            if self.dim is not None and self.k > self.dim:
                raise InvalidSpecError("top_k needs k <= ambient dimension")
        if self.kind == "singleton":
            object.__setattr__(self, "dim", len(self.anchor))
        if self.kind == "product":
            if self.factors is None or len(self.factors) != 2:
                raise InvalidSpecError("product needs exactly two factors")
            a, b = self.factors
            if a.dim is None or b.dim is None:
                raise InvalidSpecError("product factors must carry explicit dims")
            object.__setattr__(self, "dim", a.dim + b.dim)

    def with_dim(self, dim: int) -> "ConstraintSet":
        if self.dim is not None and self.dim != dim:
            raise InvalidSpecError(f"set has dim {self.dim}, cannot rebind to {dim}")
        return ConstraintSet(self.kind, self.radius, self.k, self.anchor, self.factors, dim)

    def is_convex(self) -> bool:
        if self.kind == "top_k":
            return False
        if self.kind == "product":
            return all(f.is_convex() for f in self.factors)
        return True

    def spec_string(self) -> str:
        if self.kind == "l1_ball":
            return f"l1:{self.radius:.17g}"
        if self.kind == "l2_ball":
            return f"l2:{self.radius:.17g}"
        if self.kind == "top_k":
            return f"topk:{self.k}"
        if self.kind == "full_space":
            return "full"
        if self.kind == "singleton":
            return "point:<inline>"
        a, b = self.factors
        return f"prod({a.spec_string()},{b.spec_string()})"


def _check_dim(cset: ConstraintSet, p: np.ndarray):
    if p.ndim != 1:
        raise InvalidSpecError("projection input must be a vector")
    if cset.dim is not None and len(p) != cset.dim:
        raise InvalidSpecError(f"dimension mismatch: set dim {cset.dim}, vector {len(p)}")
    if cset.kind == "top_k" and cset.k > len(p):
        raise InvalidSpecError("top_k needs k <= ambient dimension")


def _project_l1(p: np.ndarray, radius: float) -> np.ndarray:
    # relative slack keeps reprojection of an already-projected point a no-op
    if np.sum(np.abs(p)) <= radius * (1.0 + 1e-12):
        return p.copy()
    # Duchi sort-and-threshold on |p|, signs restored afterwards.
    a = np.abs(p)
    srt = np.sort(a)[::-1]
    cumsum = np.cumsum(srt)
    idx = np.arange(1, len(p) + 1)
    shifted = srt - (cumsum - radius) / idx
    rho = np.nonzero(shifted > 0)[0][-1] + 1
    theta = (cumsum[rho - 1] - radius) / rho
    return np.sign(p) * np.maximum(a - theta, 0.0)


def project(cset: ConstraintSet, p) -> np.ndarray:
    """Euclidean projection onto the set (exact for every kind)."""
    p = np.asarray(p, dtype=float)
    _check_dim(cset, p)
    if cset.kind == "full_space":
        return p.copy()
    if cset.kind == "singleton":
        return np.array(cset.anchor, dtype=float)
    if cset.kind == "l2_ball":
        nrm = np.linalg.norm(p)
        if nrm <= cset.radius * (1.0 + 1e-12):
            return p.copy()
        return p * (cset.radius / nrm)
    if cset.kind == "l1_ball":
        return _project_l1(p, cset.radius)
    if cset.kind == "top_k":
        # ties broken toward the lower index: stable sort on -|p|
        order = np.argsort(-np.abs(p), kind="stable")
        out = np.zeros_like(p)
        keep = order[: cset.k]
        out[keep] = p[keep]
        return out
    # product
    a, b = cset.factors
    return np.concatenate([project(a, p[: a.dim]), project(b, p[a.dim:])])


def contains(cset: ConstraintSet, p, tol: float = 0.0) -> bool:
    """Membership within l2 distance tol, via the exact projection."""
    if tol < 0:
        raise InvalidSpecError("tolerance must be nonnegative")
    p = np.asarray(p, dtype=float)
    _check_dim(cset, p)
    if cset.kind == "full_space":
        return True
    return bool(np.linalg.norm(p - project(cset, p)) <= tol + 1e-15)


def _split_product_args(body: str) -> tuple[str, str]:
    depth = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return body[:i], body[i + 1:]
    raise InvalidSpecError(f"cannot split product arguments in {body!r}")


def parse_set(text: str, dim: int | None = None) -> ConstraintSet:
    """Parse the set grammar: l1:<r> | l2:<r> | topk:<k> | full | point:<path> | prod(a,b).

    Product factors may carry their dims as a suffix, e.g. prod(l1:2@16,full@64).
    """
    text = text.strip()
    if "@" in text and not text.startswith("prod"):
        text, dim_str = text.rsplit("@", 1)
        dim = int(dim_str)
    if text == "full":
        return ConstraintSet("full_space", dim=dim)
    if text.startswith("l1:"):
        return ConstraintSet("l1_ball", radius=float(text[3:]), dim=dim)
    if text.startswith("l2:"):
        return ConstraintSet("l2_ball", radius=float(text[3:]), dim=dim)
    if text.startswith("topk:"):
        return ConstraintSet("top_k", k=int(text[5:]), dim=dim)
    if text.startswith("point:"):
        vec = np.loadtxt(text[6:], dtype=float).ravel()
        return ConstraintSet("singleton", anchor=tuple(float(v) for v in vec))
    if text.startswith("prod(") and text.endswith(")"):
        left, right = _split_product_args(text[5:-1])
        return ConstraintSet("product", factors=(parse_set(left), parse_set(right)))
    raise InvalidSpecError(f"cannot parse set spec {text!r}")
