"""Covering maps: constrained local inversion with a radius budget.

A covering map Psi promises: whenever the target y sits within
psi(tau'') - psi(tau') of Psi(x'), a preimage x with Psi(x) = y exists inside
the ball of radius tau'' - tau' around x'. Shipped implementations pick the
minimal-norm correction, which is deterministic and meets the budget bound
tightly. `verify_covering_sampled` audits any implementation of the
interface against that contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, RankDeficient
from .linalg import NormTag, as_matrix, as_vector, norm
from .majorant import ScalarFn

# Budget slack and relative inversion residual for the covering contract.
BUDGET_TOL = 1e-9
RESIDUAL_TOL = 1e-9


class CoveringMap:
    """Interface: evaluate Psi, invert it within a budget, expose its modulus psi."""

    psi: ScalarFn
    norm_x: NormTag = NormTag.L2
    norm_y: NormTag = NormTag.L2

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def solve_within(self, x_prime: np.ndarray, y: np.ndarray, budget: float) -> np.ndarray:
        raise NotImplementedError


class IdentityCovering(CoveringMap):
    """Psi(x) = x with modulus psi(tau) = tau; inversion returns y itself."""

    def __init__(self, dimension: int, norm_tag: NormTag = NormTag.L2):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = int(dimension)
        self.norm_x = norm_tag
        self.norm_y = norm_tag
        self.psi = ScalarFn.linear(1.0, label="identity modulus")

    def evaluate(self, x):
        return np.asarray(x, dtype=float)

    def solve_within(self, x_prime, y, budget):
        y = np.asarray(y, dtype=float)
        step = norm(y - np.asarray(x_prime, dtype=float), self.norm_x)
        if step > budget + BUDGET_TOL:
            raise BudgetExceeded(
                f"identity covering asked to move {step:.6e} > budget {budget:.6e}",
                step=step, budget=budget,
            )
        return y


class LinearSurjectiveCovering(CoveringMap):
    """Psi(x) = sign * (B x) for a surjective B, with modulus psi(tau) = b * tau.

    For l2 norms on both sides the exact largest valid covering constant is
    sigma_min(B), the default. A user-supplied b is accepted (required for
    linf norms, where no constant is computed automatically) but anything
    above sigma_min under l2/l2 is rejected unless check_constant=False;
    audit such overrides with verify_covering_sampled.
    """

    def __init__(self, B, sign: int = -1, b: float | None = None,
                 norm_x: NormTag = NormTag.L2, norm_y: NormTag = NormTag.L2,
                 check_constant: bool = True):
        if sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        self.B = as_matrix(B)
        self.sign = int(sign)
        self.norm_x = norm_x
        self.norm_y = norm_y
        m, n = self.B.shape
        u, s, vt = np.linalg.svd(self.B, full_matrices=False)
        if m > n or s[0] == 0.0 or s[-1] <= 1e-12 * s[0]:
            raise RankDeficient(f"matrix {m}x{n} is not surjective")
        self.sigma_min = float(s[-1])
        # Cached minimal-norm inverse; identical math to min_norm_solve.
        self._pinv = vt.T @ (u / s).T
        if b is None:
            if norm_x != NormTag.L2 or norm_y != NormTag.L2:
                raise ValueError("covering constant b must be supplied for non-l2 norms")
            b = self.sigma_min
        if b <= 0:
            raise ValueError("covering constant b must be positive")
        if (check_constant and norm_x == NormTag.L2 and norm_y == NormTag.L2
                and b > self.sigma_min + 1e-9):
            raise ValueError(
                f"b={b} exceeds sigma_min={self.sigma_min}; not a valid l2 covering "
                "constant (pass check_constant=False to audit it anyway)"
            )
        self.b = float(b)
        self.psi = ScalarFn.linear(self.b, label=f"{self.b}*tau")

    def evaluate(self, x):
        return self.sign * (self.B @ np.asarray(x, dtype=float))

    def solve_within(self, x_prime, y, budget):
        x_prime = as_vector(x_prime)
        y = as_vector(y)
        v = self.sign * (y - self.evaluate(x_prime))
        delta = self._pinv @ v
        step = norm(delta, self.norm_x)
        if step > budget + BUDGET_TOL:
            raise BudgetExceeded(
                f"correction {step:.6e} exceeds budget {budget:.6e} "
                f"(covering constant b={self.b} too large?)",
                step=step, budget=budget,
            )
        return x_prime + delta


@dataclass
class CoveringAudit:
    """Result of a randomized covering-contract audit."""

    trials: int
    violations: int
    max_residual: float
    max_overshoot: float

    @property
    def clean(self) -> bool:
        return self.violations == 0


def _random_direction(rng, dim, tag: NormTag):
    if tag == NormTag.L2:
        while True:
            d = rng.standard_normal(dim)
            n2 = np.linalg.norm(d)
            if n2 > 1e-12:
                return d / n2
    d = rng.uniform(-1.0, 1.0, size=dim)
    m = np.max(np.abs(d))
    if m < 1e-12:
        d[0] = 1.0
        m = 1.0
    return d / m


def verify_covering_sampled(cover: CoveringMap, region_center, region_radius: float,
                            trials: int = 1000, seed: int = 0,
                            resid_tol: float = 1e-8,
                            overshoot_tol: float = 1e-8) -> CoveringAudit:
    """Randomized audit of the covering contract.

    Samples x' in the region, a budget tau'' - tau', and a target y inside the
    allowed image ball (half the trials on its boundary, where violations of a
    wrong covering constant are largest), then checks that solve_within meets
    the inversion residual and the budget.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    center = as_vector(region_center)
    rng = np.random.default_rng(seed)
    violations = 0
    max_resid = 0.0
    max_over = 0.0
    for _ in range(trials):
        x_prime = center + region_radius * rng.uniform(-1.0, 1.0) * _random_direction(
            rng, center.size, cover.norm_x)
        tau_lo = rng.uniform(0.0, max(region_radius, 1.0))
        budget = rng.uniform(0.0, max(region_radius, 1.0))
        increment = cover.psi(tau_lo + budget) - cover.psi(tau_lo)
        psi_x = cover.evaluate(x_prime)
        frac = min(1.0, 2.0 * rng.uniform())
        y = psi_x + frac * increment * _random_direction(rng, psi_x.size, cover.norm_y)
        try:
            x = cover.solve_within(x_prime, y, budget)
        except BudgetExceeded as err:
            violations += 1
            if err.overshoot is not None:
                max_over = max(max_over, err.overshoot)
            continue
        resid = norm(cover.evaluate(x) - y, cover.norm_y) / (1.0 + norm(y, cover.norm_y))
        over = max(0.0, norm(x - x_prime, cover.norm_x) - budget)
        max_resid = max(max_resid, resid)
        max_over = max(max_over, over)
        if resid > resid_tol or over > overshoot_tol:
            violations += 1
    return CoveringAudit(trials=trials, violations=violations,
                         max_residual=max_resid, max_overshoot=max_over)
