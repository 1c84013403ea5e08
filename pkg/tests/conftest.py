"""Shared helpers: gallery construction and trace-invariant assertions."""

from __future__ import annotations

import numpy as np
import pytest

from coincide.config import build_problem, gallery_config, gallery_names
from coincide.linalg import norm
from coincide.solver import IterateTrace, ProblemInstance


def build_gallery(name: str):
    return build_problem(gallery_config(name))


@pytest.fixture(scope="session")
def gallery():
    return {name: build_gallery(name) for name in gallery_names()}


def assert_trace_invariants(inst: ProblemInstance, trace: IterateTrace,
                            step_tol: float = 1e-8, invert_tol: float = 1e-9):
    """Check the per-step certificate bounds on a recorded trace.

    deviation bound:  ||x_j - x_0||     <= tau_j - tau_0 + step_tol
    step bound:       ||x_{j+1} - x_j|| <= tau_{j+1} - tau_j + step_tol
    inversion bound:  ||Psi(x_{j+1}) - Phi(x_j)|| <= invert_tol * (1 + ||Phi(x_j)||)
    majorization:     residual_{j+1}    <= phi(tau_{j+1}) - phi(tau_j) + step_tol
    """
    norm_x, norm_y = inst.norms
    phi_fn = inst.majorants.phi
    recs = trace.records
    assert recs[0].step_norm == 0.0 and recs[0].deviation == 0.0
    for prev, cur in zip(recs, recs[1:]):
        assert cur.tau > prev.tau
        assert cur.deviation <= (cur.tau - trace.tau0) + step_tol, (
            f"deviation bound broken at j={cur.j}")
        assert cur.step_norm <= (cur.tau - prev.tau) + step_tol, (
            f"step bound broken at j={cur.j}")
        assert np.allclose(cur.step_norm, norm(cur.x - prev.x, norm_x), atol=1e-14)
        phi_prev = inst.phi.evaluate(prev.x)
        invert_gap = norm(inst.cover.evaluate(cur.x) - phi_prev, norm_y)
        assert invert_gap <= invert_tol * (1.0 + norm(phi_prev, norm_y)), (
            f"inversion residual {invert_gap} too large at j={cur.j}")
        assert cur.residual <= (phi_fn(cur.tau) - phi_fn(prev.tau)) + step_tol, (
            f"residual majorization broken at j={cur.j}")
    final = recs[-1]
    assert final.deviation <= (trace.tau_star - trace.tau0) + step_tol
