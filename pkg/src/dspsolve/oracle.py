"""Floating-point search for irreducible solution tuples.

The search parametrizes each ``A_i = g_i J_i g_i^{-1}`` by an invertible
``g_i`` and minimises ``|A_1 ... A_k - I|_F^2``.  It is a semi-oracle:
finding nothing proves nothing.  The only outcome that contradicts the exact
decider is an irreducible (Burnside rank ``n^2``) tuple with tiny residual
for an instance the decider calls unsolvable.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .decider import Guards, Status, Verdict, decide_dsp
from .spectral import EncodingError, ProblemInstance, arm_ranks, realize_class

log = logging.getLogger(__name__)

IRREDUCIBLE_MARGIN = 1e-6
COND_LIMIT = 1e12


class SingularParameter(ValueError):
    """A conjugating matrix is too close to singular."""


def class_representatives(inst: ProblemInstance) -> list[np.ndarray]:
    """One complex matrix ``J_i`` per arm with the instance's rank data."""
    if inst.xi.mode != "cyclo":
        raise EncodingError("numeric search needs cyclo eigenvalues")
    n = inst.n
    return [
        realize_class(row, arm_ranks(inst.quiver, inst.alpha, i), n, numeric=True)
        for i, row in enumerate(inst.xi.rows, start=1)
    ]


def _products(mats: Sequence[np.ndarray]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    n = mats[0].shape[0]
    k = len(mats)
    left = [np.eye(n, dtype=complex)]
    for a in mats[:-1]:
        left.append(left[-1] @ a)
    right = [np.eye(n, dtype=complex)] * k
    for i in range(k - 2, -1, -1):
        right[i] = mats[i + 1] @ right[i + 1]
    return left, right


def conjugates(gs: Sequence[np.ndarray], js: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = []
    for g, j in zip(gs, js):
        if np.linalg.cond(g) > COND_LIMIT:
            raise SingularParameter("conjugating matrix is numerically singular")
        out.append(g @ j @ np.linalg.inv(g))
    return out


def residual(gs: Sequence[np.ndarray], js: Sequence[np.ndarray]) -> float:
    mats = conjugates(gs, js)
    prod = np.linalg.multi_dot(mats) if len(mats) > 1 else mats[0]
    e = prod - np.eye(prod.shape[0])
    return float(np.vdot(e, e).real)


def grad_residual(gs: Sequence[np.ndarray], js: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Gradient of :func:`residual` as complex matrices ``dF/dRe g + i dF/dIm g``."""
    mats = conjugates(gs, js)
    n = mats[0].shape[0]
    left, right = _products(mats)
    e = left[-1] @ mats[-1] - np.eye(n)
    eh = e.conj().T
    out = []
    for g, a, lft, rgt in zip(gs, mats, left, right):
        gi = rgt @ eh @ lft
        k = np.linalg.solve(g, a @ gi - gi @ a)
        out.append(2 * k.conj().T)
    return out


def burnside_rank(mats: Sequence[np.ndarray], maxlen: int | None = None, rtol: float = IRREDUCIBLE_MARGIN) -> int:
    """Dimension of the span of all words of length ``<= maxlen`` in ``mats``.

    Words are grown one letter at a time from the identity; only words that
    enlarge the span are extended further.  Each word is normalised before the
    rank test, and a singular value counts when it exceeds ``rtol`` times the
    largest.
    """
    n = mats[0].shape[0]
    maxlen = n * n if maxlen is None else maxlen
    basis = np.eye(n, dtype=complex).reshape(1, -1)
    frontier = [np.eye(n, dtype=complex)]
    for _ in range(maxlen):
        cands = [a @ w for w in frontier for a in mats]
        new = []
        for c in cands:
            c = c / max(np.linalg.norm(c), 1e-300)
            trial = np.vstack([basis, c.reshape(1, -1)])
            s = np.linalg.svd(trial, compute_uv=False)
            # svd returns min(rows, n^2) values, so a full row count is needed too
            if len(s) == trial.shape[0] and s[-1] > rtol * s[0]:
                basis = trial
                new.append(c)
        if not new or basis.shape[0] == n * n:
            break
        frontier = new
    return basis.shape[0]


@dataclass
class Candidate:
    gs: list[np.ndarray]
    js: list[np.ndarray]

    @property
    def mats(self) -> list[np.ndarray]:
        return conjugates(self.gs, self.js)


@dataclass
class OracleReport:
    residual: float
    irreducible: bool
    word_rank: int
    restarts_used: int
    seed: int
    found: bool
    candidates: list[tuple[float, int]] = field(default_factory=list)
    best: Candidate | None = None


def _pack(gs: Sequence[np.ndarray]) -> np.ndarray:
    flat = np.concatenate([g.ravel() for g in gs])
    return np.concatenate([flat.real, flat.imag])


def _unpack(x: np.ndarray, k: int, n: int) -> list[np.ndarray]:
    half = x.size // 2
    z = x[:half] + 1j * x[half:]
    return [z[i * n * n : (i + 1) * n * n].reshape(n, n) for i in range(k)]


def _objective(x: np.ndarray, js: Sequence[np.ndarray]):
    n = js[0].shape[0]
    gs = _unpack(x, len(js), n)
    try:
        f = residual(gs, js)
        g = grad_residual(gs, js)
    except (SingularParameter, np.linalg.LinAlgError):
        return 1e10, np.zeros_like(x)
    return f, _pack(g)


def _residual_vector(x: np.ndarray, js: Sequence[np.ndarray]) -> np.ndarray:
    n = js[0].shape[0]
    gs = _unpack(x, len(js), n)
    mats = [g @ j @ np.linalg.inv(g) for g, j in zip(gs, js)]
    e = (np.linalg.multi_dot(mats) if len(mats) > 1 else mats[0]) - np.eye(n)
    return np.concatenate([e.real.ravel(), e.imag.ravel()])


def _normalise(gs: list[np.ndarray]) -> list[np.ndarray]:
    # A_i does not depend on the scale of g_i; keep determinants near 1
    out = []
    for g in gs:
        d = np.linalg.det(g)
        out.append(g / d ** (1.0 / g.shape[0]) if abs(d) > 0 else g)
    return out


def search(
    inst: ProblemInstance,
    restarts: int = 50,
    iters: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
    maxlen: int | None = None,
    stop_on_irreducible: bool = True,
) -> OracleReport:
    """Multi-start descent for a tuple with product ``I`` in the given classes.

    Each restart runs L-BFGS on the residual from random ``g_i`` and then a
    trust-region Gauss-Newton polish.  Candidates below ``tol`` are tested for
    irreducibility; with ``stop_on_irreducible`` the search ends at the first
    irreducible one, otherwise it spends the whole budget.
    """
    js = class_representatives(inst)
    n, k = inst.n, len(js)
    rng = np.random.default_rng(seed)
    report = OracleReport(float("inf"), False, 0, 0, seed, False)
    for attempt in range(1, restarts + 1):
        report.restarts_used = attempt
        gs = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(k)]
        x0 = _pack(_normalise(gs))
        res = minimize(_objective, x0, args=(js,), jac=True, method="L-BFGS-B", options={"maxiter": iters})
        x = res.x
        try:
            polish = least_squares(
                _residual_vector, x, args=(js,), method="trf", max_nfev=50, xtol=1e-15, ftol=1e-15, gtol=1e-15
            )
            x = polish.x
            gs = _normalise(_unpack(x, k, n))
            r = residual(gs, js)
        except (SingularParameter, np.linalg.LinAlgError, ValueError):
            continue
        if r < report.residual and not report.irreducible:
            report.residual = r
        if r >= tol:
            continue
        cand = Candidate(gs, js)
        rank = burnside_rank(cand.mats, maxlen)
        irreducible = rank == n * n
        report.candidates.append((r, rank))
        report.found = True
        if irreducible or report.best is None:
            report.best, report.word_rank, report.residual = cand, rank, r
        if irreducible:
            report.irreducible = True
            if stop_on_irreducible:
                break
    log.debug("search finished: %s", report)
    return report


class Agreement(enum.Enum):
    SOLVABLE_FOUND = "exact_solvable+found"
    SOLVABLE_NOT_FOUND = "exact_solvable+not_found"
    UNSOLVABLE_NONE_FOUND = "exact_unsolvable+no_irreducible_found"
    UNKNOWN = "exact_unknown"
    CONFLICT = "conflict"


@dataclass
class CrossValidation:
    agreement: Agreement
    verdict: Verdict
    report: OracleReport


def cross_validate(
    inst: ProblemInstance,
    restarts: int = 50,
    iters: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
    guards: Guards = Guards(),
    maxlen: int | None = None,
) -> CrossValidation:
    verdict = decide_dsp(inst, guards)
    unsolvable = verdict.status is Status.UNSOLVABLE
    report = search(inst, restarts, iters, tol, seed, maxlen)
    if verdict.status is Status.UNKNOWN:
        agreement = Agreement.UNKNOWN
    elif unsolvable:
        agreement = Agreement.CONFLICT if report.irreducible else Agreement.UNSOLVABLE_NONE_FOUND
    else:
        agreement = Agreement.SOLVABLE_FOUND if report.irreducible else Agreement.SOLVABLE_NOT_FOUND
    return CrossValidation(agreement, verdict, report)

