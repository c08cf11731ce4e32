"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``python
tests/test_acceptance.py``); the summary block at the end of the pytest output
lists every criterion.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest
import yaml

from dspsolve.certify import check_certificate
from dspsolve.cli import run
from dspsolve.decider import Guards, RootTable, Status, ViolatingDecomposition, decide_dsp, decide_pair
from dspsolve.docio import dump, parse_instance, verdict_to_dict
from dspsolve.oracle import Agreement, cross_validate, grad_residual, residual, search
from dspsolve.quiver import QuiverKind, StarQuiver
from dspsolve.reflections import Pair, admissible, reflect_pair
from dspsolve.spectral import (
    ONE,
    CharacterQ,
    Cyclo,
    ProblemInstance,
    RelationLattice,
    Sym,
    XiTable,
    q_from_xi,
    q_pow,
    xi_char,
)
from oracles import positive_roots_by_closure

FIXTURES = Path(__file__).parent / "fixtures"
SWEEP_QUIVERS = [(2, 2), (2, 2, 2), (3, 2), (2, 2, 2, 2), (3, 3, 3)]

# the six eigenvalues of the sweep, with (angle in sixths, power of 2)
SWEEP_VALUES = [
    (Cyclo.rational(1), 0, 0),
    (Cyclo.rational(-1), 3, 0),
    (Cyclo.root_of_unity(1, 3), 2, 0),
    (Cyclo.root_of_unity(2, 3), 4, 0),
    (Cyclo.rational(2), 0, 1),
    (Cyclo.rational(F(1, 2)), 0, -1),
]

# classes of the (3,3,3) sweep checked within the time limit
SAMPLED_CLASSES = 300
SWEEP_SECONDS = 600


def strict_vectors(quiver: StarQuiver, top: int):
    arms = [list(itertools.product(range(top + 1), repeat=w - 1)) for w in quiver.weights]
    for n in range(1, top + 1):
        for combo in itertools.product(*arms):
            if all(all(x >= y for x, y in zip((n,) + c, c)) for c in combo):
                yield (n,) + tuple(x for c in combo for x in c)


def character_exponents(quiver: StarQuiver, roots) -> np.ndarray:
    """Matrix sending eigenvalue exponents to the exponent of each root's character."""
    m = np.zeros((len(roots), sum(quiver.weights)), dtype=np.int64)
    for r_i, r in enumerate(roots):
        col = 0
        for i, w in enumerate(quiver.weights, start=1):
            ranks = [r[0], *(r[v] for v in quiver.arm(i)), 0]
            for j in range(1, w + 1):
                m[r_i, col] = ranks[j - 1] - ranks[j]
                col += 1
    return m


def _trivial_rows(quiver: StarQuiver, roots, indices: np.ndarray) -> np.ndarray:
    m = character_exponents(quiver, roots)
    angle = np.array([a for _, a, _ in SWEEP_VALUES])
    power = np.array([b for _, _, b in SWEEP_VALUES])
    digits = np.stack([(indices // 6**k) % 6 for k in range(sum(quiver.weights))], axis=1)
    return ((angle[digits] @ m.T) % 6 == 0) & ((power[digits] @ m.T) == 0)


def _class_key(row: np.ndarray, perms) -> bytes:
    return min(bytes(np.packbits(row[p])) for p in perms)


def trivial_set_classes(quiver: StarQuiver, roots) -> dict[bytes, int]:
    """Every eigenvalue table of the sweep grouped by its set of trivial roots.

    Returns one representative table index (base-6 digits) per class.  Both
    membership tests see the eigenvalues only through that set.  Tables
    related by a permutation of equal-weight arms give the same answers after
    relabelling, so those classes are merged as well.
    """
    total = 6 ** sum(quiver.weights)
    found: dict[bytes, tuple[np.ndarray, int]] = {}
    chunk = 6**7
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        uniq, first = np.unique(_trivial_rows(quiver, roots, idx), axis=0, return_index=True)
        for row, f in zip(uniq, first):
            found.setdefault(bytes(np.packbits(row)), (row, int(idx[f])))
    perms = _root_permutations(quiver, roots)
    reps: dict[bytes, int] = {}
    for row, index in found.values():
        reps.setdefault(_class_key(row, perms), index)
    return reps


def sampled_classes(quiver: StarQuiver, roots, count: int, rng: random.Random) -> dict[bytes, int]:
    """``count`` distinct classes reached from uniformly random tables."""
    perms = _root_permutations(quiver, roots)
    total = 6 ** sum(quiver.weights)
    reps: dict[bytes, int] = {}
    while len(reps) < count:
        idx = np.array([rng.randrange(total) for _ in range(4 * count)])
        for row, index in zip(_trivial_rows(quiver, roots, idx), idx):
            if len(reps) < count:
                reps.setdefault(_class_key(row, perms), int(index))
    return reps


def _root_permutations(quiver: StarQuiver, roots) -> list[list[int]]:
    pos = {r: i for i, r in enumerate(roots)}
    k = len(quiver.weights)
    out = []
    for perm in itertools.permutations(range(1, k + 1)):
        if any(quiver.weights[p - 1] != quiver.weights[i] for i, p in enumerate(perm)):
            continue
        vmap = [0] * quiver.size
        for i, p in enumerate(perm, start=1):
            for u, v in zip(quiver.arm(i), quiver.arm(p)):
                vmap[u] = v
        out.append([pos[tuple(r[vmap[u]] for u in range(quiver.size))] for r in roots])
    return out


def table_from_index(quiver: StarQuiver, index: int) -> XiTable:
    rows, k = [], 0
    for w in quiver.weights:
        rows.append(tuple(SWEEP_VALUES[(index // 6 ** (k + j)) % 6][0] for j in range(w)))
        k += w
    return XiTable(tuple(rows))


def sweep_class(quiver: StarQuiver, xi: XiTable, alphas, bound) -> tuple[int, int]:
    table = RootTable(quiver, q_from_xi(quiver, xi), bound)
    bad = 0
    for a in alphas:
        if table.sigma_by_definition(a) != table.sigma_by_pairing(a):
            bad += 1
    return bad, len(alphas)


# -- 1 ----------------------------------------------------------------------------


def test_criterion_1_path_equivalence(record):
    t0 = time.perf_counter()
    disagreements = checked = 0
    coverage = []
    rng = random.Random(20260101)
    for w in SWEEP_QUIVERS:
        quiver = StarQuiver(w)
        bound = (4,) * quiver.size
        roots = quiver.positive_roots_below(bound)
        perms = _root_permutations(quiver, roots)
        alphas = list(strict_vectors(quiver, 4))
        if w == (3, 3, 3):
            reps = sampled_classes(quiver, roots, SAMPLED_CLASSES, rng)
            label = f"{len(reps)} sampled classes"
        else:
            reps = trivial_set_classes(quiver, roots)
            label = f"all {len(reps)} classes"
        for key, index in reps.items():
            xi = table_from_index(quiver, index)
            # the exponent model used for grouping must agree with the library
            row = np.array([q_pow(q_from_xi(quiver, xi), r).is_one() for r in roots])
            assert _class_key(row, perms) == key
            bad, n = sweep_class(quiver, xi, alphas, bound)
            disagreements += bad
            checked += n
        coverage.append(f"{w}: {label} x {len(alphas)} alpha")
    elapsed = time.perf_counter() - t0
    # (3,3,3) has 6^9 tables in 401,312 trivial-root classes (71,005 up to
    # arm symmetry); at roughly 0.04 s per class the full sweep takes about 50 minutes, so
    # only a sample fits the time limit and the exhaustive clause stays unmet
    exhaustive = False
    ok = disagreements == 0 and elapsed <= SWEEP_SECONDS and exhaustive
    detail = (
        f"{disagreements} disagreements over {checked} (alpha, q) checks in {elapsed:.0f}s; "
        + "; ".join(coverage)
        + "; not exhaustive: (3,3,3) is sampled, the full sweep does not fit in 10 minutes"
    )
    record(1, ok, detail)
    assert disagreements == 0 and elapsed <= SWEEP_SECONDS, detail
    assert exhaustive, detail


# -- 2 ----------------------------------------------------------------------------


def test_criterion_2_reflection_invariance(record):
    rng = random.Random(7)
    guards = Guards(max_box=200_000)
    values = [v for v, _, _ in SWEEP_VALUES] + [Cyclo.rational(3), Cyclo(F(1, 3), F(1, 5))]
    violations = compared = skipped = 0
    for _ in range(1000):
        quiver = StarQuiver(rng.choice(SWEEP_QUIVERS))
        xi = XiTable(tuple(tuple(rng.choice(values) for _ in range(w)) for w in quiver.weights))
        alpha = rng.choice(list(strict_vectors(quiver, 3)))
        pair = Pair(q_from_xi(quiver, xi), alpha)
        base_char, base_p = q_pow(pair.q, alpha), quiver.p(alpha)
        start = decide_pair(quiver, pair.q, alpha, guards).status
        cur = pair
        for _ in range(rng.randint(1, 5)):
            options = [v for v in range(quiver.size) if admissible(v, cur)]
            if not options:
                break
            cur = reflect_pair(quiver, rng.choice(options), cur)
            if q_pow(cur.q, cur.alpha) != base_char or quiver.p(cur.alpha) != base_p:
                violations += 1
        end = decide_pair(quiver, cur.q, cur.alpha, guards).status
        if Status.UNKNOWN in (start, end):
            skipped += 1
        else:
            compared += 1
            violations += start is not end
    record(2, violations == 0, f"{violations} violations; {compared} verdict pairs compared, {skipped} beyond guards")
    assert violations == 0


# -- 3 ----------------------------------------------------------------------------


def test_criterion_3_root_oracle(record):
    mismatches = 0
    counts = {}
    for w in SWEEP_QUIVERS:
        quiver = StarQuiver(w)
        bound = (3,) * quiver.size
        oracle = positive_roots_by_closure(quiver, bound)
        for b in itertools.product(range(4), repeat=quiver.size):
            if any(b):
                mismatches += quiver.is_positive_root(b) != (b in oracle)
        counts[w] = len(oracle)
    expected = {(2, 2): 6, (2, 2, 2): 12, (3, 2): 10}
    ok = mismatches == 0 and all(counts[w] == n for w, n in expected.items())
    record(3, ok, f"{mismatches} mismatches; counts {counts}")
    assert ok


# -- 4 ----------------------------------------------------------------------------


def test_criterion_4_tubular(record):
    found = set()
    bad = []
    for k in range(1, 5):
        for w in itertools.combinations_with_replacement(range(1, 8), k):
            cls = StarQuiver(w).classify()
            if cls.kind is not QuiverKind.EXTENDED_DYNKIN:
                continue
            # arms of weight 1 add no vertex, so (3,3,3,1) is the (3,3,3) quiver
            found.add(tuple(sorted((x for x in w if x > 1), reverse=True)))
            quiver = StarQuiver(w)
            if quiver.tits(cls.delta) != 0 or cls.delta[0] != math.lcm(*w) or min(cls.delta) < 1:
                bad.append(w)
    expected = {(2, 2, 2, 2), (3, 3, 3), (4, 4, 2), (6, 3, 2)}
    ok = found == expected and not bad
    record(4, ok, f"extended Dynkin weight types {sorted(found)}; delta problems {bad}")
    assert ok


# -- 5 ----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_5_case_one(record):
    inst = parse_instance((FIXTURES / "case1_tubular.yaml").read_text())
    verdict = decide_dsp(inst)
    doc = yaml.safe_load(dump(verdict_to_dict(inst, verdict)))
    check = check_certificate(doc, inst)
    report = search(inst, restarts=200, seed=0, stop_on_irreducible=False)
    n2 = inst.n**2
    irreducible = [rank for _, rank in report.candidates if rank >= n2]
    ok = (
        verdict.status is Status.UNSOLVABLE
        and isinstance(verdict.certificate, ViolatingDecomposition)
        and check.valid
        and not irreducible
    )
    record(
        5,
        ok,
        f"verdict {verdict.status.value}, certificate valid={check.valid}; "
        f"{len(report.candidates)} of 200 restarts reached residual < 1e-8, "
        f"max word rank {max((r for _, r in report.candidates), default=0)} < {n2}",
    )
    assert ok


# -- 6 ----------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_6_rigid_corpus(record):
    rng = random.Random(6)
    failures = []
    for t in range(50):
        k = rng.randint(1, 4)
        vals = [Cyclo(F(rng.randint(1, 9), rng.randint(1, 9)), F(rng.randint(0, 11), 12)) for _ in range(k - 1)]
        last = ONE
        for v in vals:
            last = last * v
        xi = XiTable(tuple((v,) for v in vals) + ((last.inverse(),),))
        inst = ProblemInstance(StarQuiver((1,) * k), xi, (1,))
        cv = cross_validate(inst, restarts=3, seed=t)
        if cv.agreement is not Agreement.SOLVABLE_FOUND or cv.report.word_rank != 1:
            failures.append((t, cv.agreement.value))
    hyper = parse_instance((FIXTURES / "hypergeometric.yaml").read_text())
    cv = cross_validate(hyper, restarts=50, seed=0)
    hyper_ok = cv.agreement is Agreement.SOLVABLE_FOUND and cv.report.word_rank == 4 and cv.report.residual < 1e-8
    conflicts = []
    for path in sorted(FIXTURES.glob("*.yaml")):
        inst = parse_instance(path.read_text())
        if inst.xi.mode != "cyclo" or decide_dsp(inst).status is Status.UNKNOWN:
            continue
        if cross_validate(inst, restarts=5, seed=1).agreement is Agreement.CONFLICT:
            conflicts.append(path.name)
    ok = not failures and hyper_ok and not conflicts
    record(
        6,
        ok,
        f"n=1 sweep failures {failures}; hypergeometric {cv.agreement.value} "
        f"residual {cv.report.residual:.1e} rank {cv.report.word_rank}; conflicts {conflicts}",
    )
    assert ok


# -- 7 ----------------------------------------------------------------------------


def _finite_difference(gs, js, h=1e-6):
    out = []
    for i, g in enumerate(gs):
        grad = np.zeros_like(g)
        for idx in np.ndindex(g.shape):
            for unit in (1, 1j):
                plus = [x.copy() for x in gs]
                minus = [x.copy() for x in gs]
                plus[i][idx] += unit * h
                minus[i][idx] -= unit * h
                grad[idx] += unit * (residual(plus, js) - residual(minus, js)) / (2 * h)
        out.append(grad)
    return out


def test_criterion_7_gradient(record):
    rng = np.random.default_rng(7)
    worst = 0.0
    scalar_max = 0.0
    for t in range(100):
        n, k = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        gs = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(k)]
        js = []
        for _ in range(k):
            j = np.diag(rng.standard_normal(n) + 1j * rng.standard_normal(n))
            if n > 1 and rng.random() < 0.5:
                j[0, 1] = 1.0
                j[1, 1] = j[0, 0]
            js.append(j)
        an = grad_residual(gs, js)
        if n == 1:
            # scalars commute, so the residual does not depend on g at all
            scalar_max = max(scalar_max, max(float(np.abs(a).max()) for a in an))
            continue
        fd = _finite_difference(gs, js)
        num = math.sqrt(sum(np.linalg.norm(a - f) ** 2 for a, f in zip(an, fd)))
        den = math.sqrt(sum(np.linalg.norm(f) ** 2 for f in fd))
        worst = max(worst, num / den)
    ok = worst < 1e-5 and scalar_max == 0.0
    record(7, ok, f"worst relative error {worst:.2e} (n >= 2); largest n=1 gradient entry {scalar_max}")
    assert ok


# -- 8 ----------------------------------------------------------------------------


def test_criterion_8_exact_identities(record):
    rng = random.Random(8)
    failures = {"cyclo": 0, "sym": 0}
    for mode in failures:
        for _ in range(10_000):
            quiver = StarQuiver(tuple(rng.randint(1, 4) for _ in range(rng.randint(1, 4))))
            if mode == "cyclo":
                rows = tuple(
                    tuple(Cyclo(F(rng.randint(1, 30), rng.randint(1, 30)), F(rng.randint(0, 59), 60)) for _ in range(w))
                    for w in quiver.weights
                )
            else:
                ngens = rng.randint(1, 6)
                rels = tuple(tuple(rng.randint(-3, 3) for _ in range(ngens)) for _ in range(rng.randint(0, 2)))
                lat = RelationLattice(ngens, rels)
                rows = tuple(
                    tuple(Sym(tuple(rng.randint(-2, 2) for _ in range(ngens)), lat) for _ in range(w))
                    for w in quiver.weights
                )
            xi = XiTable(rows)
            a = tuple(rng.randint(-3, 5) for _ in range(quiver.size))
            b = tuple(rng.randint(-3, 5) for _ in range(quiver.size))
            ab = tuple(x + y for x, y in zip(a, b))
            q = q_from_xi(quiver, xi)
            if not (xi_char(quiver, xi, a) * q_pow(q, a)).is_one():
                failures[mode] += 1
            if xi_char(quiver, xi, ab) != xi_char(quiver, xi, a) * xi_char(quiver, xi, b):
                failures[mode] += 1
    ok = not any(failures.values())
    record(8, ok, f"failures per mode {failures} over 10000 samples each")
    assert ok


# -- 9 ----------------------------------------------------------------------------


def _corpus(rng: random.Random):
    for path in sorted(FIXTURES.glob("*.yaml")):
        yield parse_instance(path.read_text())
    values = [v for v, _, _ in SWEEP_VALUES]
    for _ in range(300):
        quiver = StarQuiver(rng.choice(SWEEP_QUIVERS))
        xi = XiTable(tuple(tuple(rng.choice(values[: rng.randint(1, 6)]) for _ in range(w)) for w in quiver.weights))
        yield ProblemInstance(quiver, xi, rng.choice(list(strict_vectors(quiver, 3))))


def test_criterion_9_certificate_audit(record, tmp_path, capsys):
    rng = random.Random(9)
    audited = invalid = 0
    kinds: dict[str, int] = {}
    path = tmp_path / "verdict.yaml"
    for inst in _corpus(rng):
        verdict = decide_dsp(inst)
        if verdict.status is not Status.UNSOLVABLE:
            continue
        doc = verdict_to_dict(inst, verdict)
        path.write_text(dump(doc))
        code = run(["validate-cert", str(path)])
        capsys.readouterr()
        audited += 1
        invalid += code != 0
        kinds[doc["certificate"]["type"]] = kinds.get(doc["certificate"]["type"], 0) + 1
    ok = invalid == 0 and audited > 0
    record(9, ok, f"{audited - invalid}/{audited} unsolvable certificates re-validated; by type {kinds}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
