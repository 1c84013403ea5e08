"""Linear-rate baseline: successive approximation under an alpha-covering.

The classical scheme inverts u(x_{i+1}) = v(x_i) and contracts with ratio
beta/alpha whenever the Lipschitz constant beta of v sits strictly below the
covering constant alpha of u. On the degenerate quadratic instances
(discriminant zero) beta equals alpha and the scheme is inapplicable, while
the majorant-controlled solver still certifies a solution; compare_methods
reports both side by side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covering import CoveringMap, LinearSurjectiveCovering
from .errors import InsufficientData, NoCrossing, NotContractive
from .linalg import NormTag, as_vector, norm
from .solver import (
    STATUS_CONVERGED,
    STATUS_MAX_STEPS,
    IterateTrace,
    SmoothMap,
    TraceRecord,
    coincidence_solve,
    rate_estimate,
)
from .problems import QuadraticMap, QuadraticProblem, build_quadratic_instance


def estimate_lipschitz(v: SmoothMap, center, radius: float, pairs: int = 500,
                       seed: int = 0, norm_x: NormTag = NormTag.L2,
                       norm_y: NormTag = NormTag.L2) -> float:
    """Sampled sup of ||v(x1) - v(x2)|| / ||x1 - x2|| on the working ball.

    Sampling under-estimates the true constant; prefer an analytic bound when
    one is available (e.g. 2 a tau_* for quadratic maps).
    """
    center = as_vector(center)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        d1 = rng.standard_normal(center.size)
        d2 = rng.standard_normal(center.size)
        x1 = center + rng.uniform(0, radius) * d1 / max(np.linalg.norm(d1), 1e-12)
        x2 = center + rng.uniform(0, radius) * d2 / max(np.linalg.norm(d2), 1e-12)
        dist = norm(x1 - x2, norm_x)
        if dist < 1e-9:
            continue
        worst = max(worst, norm(v.evaluate(x1) - v.evaluate(x2), norm_y) / dist)
    return worst


@dataclass
class AlphaCoveringProblem:
    """Covering u with linear modulus alpha*tau against a beta-Lipschitz v."""

    u: CoveringMap
    v: SmoothMap
    alpha: float
    beta: float

    @property
    def applicable(self) -> bool:
        return self.beta < self.alpha

    @classmethod
    def from_quadratic(cls, q: QuadraticProblem) -> "AlphaCoveringProblem":
        """Restrict the quadratic instance to the ball of radius tau_*.

        There the analytic Lipschitz constant of Phi is 2 a tau_*; the
        covering constant is b. The two coincide exactly when D = 0.
        """
        tau_star = q.tau_star()
        return cls(
            u=LinearSurjectiveCovering(q.linear, sign=-1, b=q.b),
            v=QuadraticMap(q.bilinear, q.offset, domain_radius=tau_star),
            alpha=q.b,
            beta=2.0 * q.a * tau_star,
        )


def alpha_iterate(p: AlphaCoveringProblem, x0, tol: float,
                  max_steps: int) -> tuple[np.ndarray, IterateTrace]:
    """Iterate u(x_{i+1}) = v(x_i) with per-step budget ||v(x_i) - u(x_i)|| / alpha.

    Raises NotContractive unless beta < alpha. Step norms contract with ratio
    at most beta/alpha; the trace's tau column accumulates the budgets, so the
    same certificate bounds as the majorant trace apply.
    """
    if not p.applicable:
        raise NotContractive(
            f"beta = {p.beta} >= alpha = {p.alpha}: the linear-rate scheme does not apply")
    x = as_vector(x0).copy()
    x_start = x.copy()
    v_x = p.v.evaluate(x)
    residual = norm(v_x - p.u.evaluate(x), p.u.norm_y)
    tau = 0.0
    trace = IterateTrace(records=[TraceRecord(0, tau, x.copy(), 0.0, 0.0, residual)],
                         tau0=0.0, tau_star=float("nan"))
    for i in range(max_steps):
        if residual <= tol:
            trace.status = STATUS_CONVERGED
            return x, trace
        budget = residual / p.alpha
        x_next = p.u.solve_within(x, v_x, budget)
        v_x = p.v.evaluate(x_next)
        residual = norm(v_x - p.u.evaluate(x_next), p.u.norm_y)
        tau += budget
        trace.records.append(TraceRecord(
            j=i + 1,
            tau=tau,
            x=np.array(x_next, dtype=float),
            step_norm=norm(x_next - x, p.u.norm_x),
            deviation=norm(x_next - x_start, p.u.norm_x),
            residual=residual,
        ))
        x = x_next
    trace.status = STATUS_MAX_STEPS
    return x, trace


@dataclass
class MethodRun:
    method: str
    status: str
    steps: int
    rate_regime: str
    rate_value: float
    residual: float
    x_star: Optional[np.ndarray] = None
    applicable: bool = True
    detail: str = ""


@dataclass
class ComparisonReport:
    runs: list = field(default_factory=list)
    majorant_trace: Optional[IterateTrace] = None
    baseline_trace: Optional[IterateTrace] = None

    def run_for(self, method: str) -> MethodRun:
        for r in self.runs:
            if r.method == method:
                return r
        raise KeyError(method)


def _rate_or_na(trace: IterateTrace) -> tuple[str, float]:
    try:
        return rate_estimate(trace)
    except InsufficientData:
        return "insufficient-data", float("nan")


def compare_methods(q: QuadraticProblem, tol: float = 1e-10,
                    max_steps: int = 100_000) -> ComparisonReport:
    """Run both schemes on the same instance and tabulate the outcomes.

    The baseline row reports not_contractive when beta >= alpha (exactly the
    D = 0 regime); the majorant row carries its usual status. Both methods
    share the same minimal-norm inversion, so step counts are comparable.
    """
    report = ComparisonReport()
    inst = build_quadratic_instance(q)

    try:
        x_m, trace_m = coincidence_solve(inst, residual_tol=tol, max_steps=max_steps)
        regime, value = _rate_or_na(trace_m)
        report.majorant_trace = trace_m
        report.runs.append(MethodRun(
            method="majorant", status=trace_m.status, steps=trace_m.steps,
            rate_regime=regime, rate_value=value,
            residual=trace_m.final.residual, x_star=x_m, detail=trace_m.detail))
    except NoCrossing as err:
        report.runs.append(MethodRun(
            method="majorant", status="no_crossing", steps=0,
            rate_regime="n/a", rate_value=float("nan"),
            residual=float("nan"), applicable=False, detail=str(err)))

    try:
        p = AlphaCoveringProblem.from_quadratic(q)
        x_b, trace_b = alpha_iterate(p, np.zeros(q.dim_x), tol, max_steps)
        regime, value = _rate_or_na(trace_b)
        report.baseline_trace = trace_b
        report.runs.append(MethodRun(
            method="baseline", status=trace_b.status, steps=trace_b.steps,
            rate_regime=regime, rate_value=value,
            residual=trace_b.final.residual, x_star=x_b, detail=""))
    except NotContractive as err:
        report.runs.append(MethodRun(
            method="baseline", status="not_contractive", steps=0,
            rate_regime="n/a", rate_value=float("nan"),
            residual=float("nan"), applicable=False, detail=str(err)))
    return report
