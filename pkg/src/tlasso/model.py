"""Synthetic corrupted non-linear sensing problems.

Observations follow y = f(Phi x*) + sqrt(m) v* with i.i.d. standard normal
Phi, a unit-norm s-sparse signal x*, and a k-sparse spike corruption v*. The
sqrt(m) factor puts the corruption columns on the same scale as the columns
of Phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .links import LinkFunction, apply_link, parse_link


def rng_from(*keys: int) -> np.random.Generator:
    """Counter-based generator keyed by an integer tuple; splittable and stable."""
    return np.random.Generator(
        np.random.Philox(key=np.random.SeedSequence(list(keys)).generate_state(2, np.uint64)))


def derive_seed(*keys: int) -> int:
    """Stable 64-bit sub-seed for a trial cell."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    m: int
    s: int
    k: int
    corruption_amplitude: float
    link: LinkFunction
    seed: int

    def __post_init__(self):
        if not (1 <= self.s <= self.n):
            raise InvalidSpecError("need 1 <= s <= n (signal must be normalizable)")
        if not (0 <= self.k <= self.m):
            raise InvalidSpecError("need 0 <= k <= m")
        if self.corruption_amplitude < 0:
            raise InvalidSpecError("corruption amplitude must be nonnegative")


@dataclass(frozen=True)
class ProblemInstance:
    phi: np.ndarray        # (m, n)
    x_star: np.ndarray     # (n,), unit l2 norm
    v_star: np.ndarray     # (m,)
    y: np.ndarray          # (m,)
    link: LinkFunction
    seed: int

    @property
    def n(self) -> int:
        return self.phi.shape[1]

    @property
    def m(self) -> int:
        return self.phi.shape[0]


def generate_instance(spec: InstanceSpec) -> ProblemInstance:
    """Draw one problem instance; bit-identical for equal specs."""
    rng = rng_from(spec.seed)
    phi = rng.standard_normal((spec.m, spec.n))

    x = np.zeros(spec.n)
    support = rng.choice(spec.n, size=spec.s, replace=False)
    x[support] = rng.standard_normal(spec.s)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:  # probability zero, but keep the invariant unconditional
        x[support[0]] = 1.0
        nrm = 1.0
    x /= nrm

    v = np.zeros(spec.m)
    if spec.k > 0:
        vsupport = rng.choice(spec.m, size=spec.k, replace=False)
        v[vsupport] = spec.corruption_amplitude * rng.choice([-1.0, 1.0], size=spec.k)

    y = apply_link(spec.link, phi @ x) + np.sqrt(spec.m) * v
    return ProblemInstance(phi=phi, x_star=x, v_star=v, y=y, link=spec.link, seed=spec.seed)


def residual(inst: ProblemInstance, x, v) -> np.ndarray:
    """y - Phi x - sqrt(m) v, the loss argument."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (inst.n,) or v.shape != (inst.m,):
        raise InvalidSpecError("residual: dimension mismatch")
    return inst.y - inst.phi @ x - np.sqrt(inst.m) * v


def save_instance(inst: ProblemInstance, path: str):
    """Portable text dump: header line, then Phi rows, x*, v*, y blocks."""
    with open(path, "w") as fh:
        fh.write(f"{inst.n} {inst.m} {inst.seed} {inst.link.spec_string()}\n")
        for row in inst.phi:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        for block in (inst.x_star, inst.v_star, inst.y):
            fh.write(" ".join(f"{v:.17g}" for v in block) + "\n")


def load_instance(path: str) -> ProblemInstance:
    with open(path) as fh:
        header = fh.readline().split(maxsplit=3)
        n, m, seed = int(header[0]), int(header[1]), int(header[2])
        link = parse_link(header[3].strip())
        rows = [np.fromstring(fh.readline(), sep=" ") for _ in range(m + 3)]
    phi = np.vstack(rows[:m])
    x_star, v_star, y = rows[m], rows[m + 1], rows[m + 2]
    if phi.shape != (m, n) or len(x_star) != n or len(v_star) != m or len(y) != m:
        raise InvalidSpecError(f"malformed instance file {path}")
    return ProblemInstance(phi=phi, x_star=x_star, v_star=v_star, y=y, link=link, seed=seed)
