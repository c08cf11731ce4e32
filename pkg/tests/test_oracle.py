from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from dspsolve.docio import parse_instance
from dspsolve.oracle import (
    Agreement,
    burnside_rank,
    class_representatives,
    cross_validate,
    grad_residual,
    residual,
    search,
)
from dspsolve.quiver import StarQuiver
from dspsolve.spectral import EncodingError, XiTable, alpha_from_matrices, arm_ranks

FIXTURES = Path(__file__).parent / "fixtures"


def load(name: str):
    return parse_instance((FIXTURES / name).read_text())


def finite_difference(gs, js, h=1e-6):
    out = []
    for i, g in enumerate(gs):
        grad = np.zeros_like(g)
        for idx in np.ndindex(g.shape):
            for unit in (1, 1j):
                plus = [x.copy() for x in gs]
                minus = [x.copy() for x in gs]
                plus[i][idx] += unit * h
                minus[i][idx] -= unit * h
                d = (residual(plus, js) - residual(minus, js)) / (2 * h)
                grad[idx] += d * unit
        out.append(grad)
    return out


def random_point(rng, n, k):
    gs = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(k)]
    js = [np.diag(rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(k)]
    return gs, js


def test_residual_examples():
    assert residual([np.eye(2)], [np.eye(2)]) == 0.0
    assert residual([np.eye(2)], [np.diag([2.0, 0.5])]) == pytest.approx(1.25)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    for n, k in [(1, 2), (2, 2), (2, 3), (3, 4)]:
        gs, js = random_point(rng, n, k)
        an = grad_residual(gs, js)
        fd = finite_difference(gs, js)
        num = np.sqrt(sum(np.linalg.norm(a - f) ** 2 for a, f in zip(an, fd)))
        den = np.sqrt(sum(np.linalg.norm(f) ** 2 for f in fd))
        # for n = 1 the residual ignores g entirely and both sides vanish
        assert num <= 1e-5 * max(den, 1.0)


def test_gradient_vanishes_at_solution():
    js = [np.diag([2.0, 3.0]), np.diag([0.5, 1 / 3])]
    gs = [np.eye(2, dtype=complex), np.eye(2, dtype=complex)]
    assert residual(gs, js) == 0.0
    assert max(np.linalg.norm(g) for g in grad_residual(gs, js)) < 1e-10


def test_gauge_invariance():
    rng = np.random.default_rng(9)
    gs, js = random_point(rng, 3, 3)
    scales = [2.0, -0.5 + 1j, 3j]
    scaled = [s * g for s, g in zip(scales, gs)]
    assert abs(residual(scaled, js) - residual(gs, js)) < 1e-12 * max(1.0, residual(gs, js))
    # scaling direction is orthogonal to the gradient
    grads = grad_residual(gs, js)
    inner = sum(np.vdot(g, d).real for g, d in zip(gs, grads))
    assert abs(inner) < 1e-8 * max(1.0, sum(np.linalg.norm(d) for d in grads))


def test_burnside_rank_examples():
    assert burnside_rank([np.array([[2.0]])]) == 1
    assert burnside_rank([np.eye(2), np.eye(2)]) == 1
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    b = np.array([[1.0, 0.0], [1.0, 1.0]])
    assert burnside_rank([a, b]) == 4
    assert burnside_rank([a]) == 2
    ranks = [burnside_rank([a, b], maxlen=m) for m in range(0, 5)]
    assert ranks == sorted(ranks) and ranks[-1] == 4


def test_search_hypergeometric():
    inst = load("hypergeometric.yaml")
    report = search(inst, restarts=50, seed=0)
    assert report.found and report.irreducible
    assert report.residual < 1e-16
    assert report.word_rank == 4
    # each factor stays in its class
    for i, (mat, row) in enumerate(zip(report.best.mats, inst.xi.rows), start=1):
        ranks = alpha_from_matrices(StarQuiver((len(row),)), [mat], XiTable((row,)), rtol=1e-6)
        assert list(ranks[1:]) == arm_ranks(inst.quiver, inst.alpha, i)


def test_cross_validation_outcomes():
    assert cross_validate(load("n1_solvable.yaml"), restarts=3).agreement is Agreement.SOLVABLE_FOUND
    cv = cross_validate(load("case1_tubular.yaml"), restarts=3, seed=1)
    assert cv.agreement is Agreement.UNSOLVABLE_NONE_FOUND
    assert all(rank < 16 for _, rank in cv.report.candidates)


def test_class_representatives_need_cyclo():
    with pytest.raises(EncodingError):
        class_representatives(load("sym_generic.yaml"))
