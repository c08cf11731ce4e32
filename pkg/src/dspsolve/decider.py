"""Solvability decisions via roots with trivial character.

For a character ``q`` on the vertices, ``R_q`` is the set of positive roots
``b`` with ``q^b = 1`` and ``NR_q`` the set of non-empty sums of such roots.
``Sigma_q`` consists of those ``a`` in ``R_q`` for which every decomposition
``a = b + c + ...`` into at least two elements of ``R_q`` has
``p(a) > p(b) + p(c) + ...``.  A tuple ``A_1 ... A_k = 1`` with prescribed
classes has an irreducible solution exactly when the rank vector lies in
``Sigma_q`` for the character built from the eigenvalues.

Membership is computed two ways that must agree:

* :func:`sigma_by_definition` -- maximises ``sum p(parts)`` over all
  decompositions (a knapsack over the box below ``a``);
* :func:`sigma_by_pairing` -- checks ``(b, a - b) <= -2`` for every split
  with both halves in ``NR_q``.
"""

from __future__ import annotations

import enum
import math
import os
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .quiver import DEFAULT_MAX_BOX, RootKind, StarQuiver, Vector
from .spectral import CharacterQ, EncodingError, MValue, ProblemInstance, q_from_xi, q_pow, xi_char

NEG = -(10**9)


class GuardExceeded(RuntimeError):
    def __init__(self, guard: str, required: int, limit: int):
        super().__init__(f"{guard} guard exceeded: needs {required}, limit {limit}")
        self.guard = guard
        self.required = required
        self.limit = limit


class PathDisagreement(AssertionError):
    """The two membership tests for Sigma_q gave different answers."""


@dataclass(frozen=True)
class Guards:
    max_box: int = 10**6
    max_decomps: int = 10**5

    @classmethod
    def from_env(cls) -> "Guards":
        return cls(
            max_box=int(os.environ.get("DSPSOLVE_MAX_BOX", cls.max_box)),
            max_decomps=int(os.environ.get("DSPSOLVE_MAX_DECOMPS", cls.max_decomps)),
        )


def _add(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def _leq(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


class RootTable:
    """Roots with trivial character and their sums, for every vector below ``bound``.

    ``best[b]`` is the largest ``sum p(parts)`` over decompositions of ``b``
    into elements of ``R_q`` (``NEG`` if none; ``best[0] = 0``), ``best2``
    the same restricted to at least two parts, and ``reachable`` the boolean
    ``b in NR_q`` computed by its own pass.
    """

    def __init__(self, quiver: StarQuiver, q: CharacterQ, bound: Sequence[int], max_box: int = DEFAULT_MAX_BOX):
        if len(q) != quiver.size:
            raise ValueError("character does not match quiver")
        if any(x < 0 for x in bound):
            raise ValueError("bound must be non-negative")
        self.quiver = quiver
        self.q = q
        self.bound = tuple(bound)
        self.shape = tuple(x + 1 for x in bound)
        volume = math.prod(self.shape)
        if volume > max_box:
            raise GuardExceeded("box", volume, max_box)
        self.roots = quiver.positive_roots_below(self.bound, max_box=max_box)
        self.trivial = [r for r in self.roots if q_pow(q, r).is_one()]
        self.trivial_set = frozenset(self.trivial)
        self.pvals = {r: quiver.p(r) for r in self.trivial}
        self._build_best()
        self._build_reachable()
        self._build_forms()

    # -- tables ------------------------------------------------------------

    def _slices(self, r: Sequence[int]):
        tgt = tuple(slice(x, None) for x in r)
        src = tuple(slice(0, n - x) for x, n in zip(r, self.shape))
        return tgt, src

    def _copies(self, r: Sequence[int]) -> int:
        return min(b // x for b, x in zip(self.bound, r) if x)

    def _build_best(self) -> None:
        best = np.full(self.shape, NEG, dtype=np.int64)
        best[(0,) * len(self.shape)] = 0
        for r in self.trivial:
            tgt, src = self._slices(r)
            for _ in range(self._copies(r)):
                cand = np.where(best[src] > NEG, best[src] + self.pvals[r], NEG)
                best[tgt] = np.maximum(best[tgt], cand)
        nz = best.copy()
        nz[(0,) * len(self.shape)] = NEG
        best2 = np.full(self.shape, NEG, dtype=np.int64)
        for r in self.trivial:
            tgt, src = self._slices(r)
            cand = np.where(nz[src] > NEG, nz[src] + self.pvals[r], NEG)
            best2[tgt] = np.maximum(best2[tgt], cand)
        self.best = best
        self.best2 = best2

    def _build_reachable(self) -> None:
        reach = np.zeros(self.shape, dtype=bool)
        reach[(0,) * len(self.shape)] = True
        for r in self.trivial:
            tgt, src = self._slices(r)
            for _ in range(self._copies(r)):
                reach[tgt] |= reach[src]
        reach[(0,) * len(self.shape)] = False
        self.reachable = reach

    def _build_forms(self) -> None:
        grid = np.indices(self.shape, dtype=np.int64)
        tits = sum(g * g for g in grid)
        for t, h in self.quiver.arrows:
            tits = tits - grid[t] * grid[h]
        self.grid = grid
        self.tits = tits

    # -- queries -------------------------------------------------------------

    def _inside(self, a: Sequence[int]) -> Vector:
        a = tuple(a)
        if len(a) != len(self.shape):
            raise ValueError("vector does not match quiver")
        if any(x < 0 for x in a):
            raise ValueError("only non-negative vectors are supported")
        if not _leq(a, self.bound):
            raise ValueError(f"{a} lies outside the table bound {self.bound}")
        return a

    def in_Rq(self, a: Sequence[int]) -> bool:
        return self._inside(a) in self.trivial_set

    def in_NRq(self, a: Sequence[int]) -> bool:
        return bool(self.reachable[self._inside(a)])

    def sigma_by_definition(self, a: Sequence[int]) -> bool:
        a = self._inside(a)
        if a not in self.trivial_set:
            return False
        return int(self.best2[a]) < self.pvals[a]

    def violating_decomposition(self, a: Sequence[int]) -> list[Vector] | None:
        """Parts ``b, c, ...`` in ``R_q`` with ``p(a) <= sum p``, or ``None``."""
        a = self._inside(a)
        if a not in self.trivial_set or int(self.best2[a]) < self.pvals[a]:
            return None
        target = int(self.best2[a])
        zero = (0,) * len(a)
        for r in self.trivial:
            if r == a or not _leq(r, a):
                continue
            rest = _sub(a, r)
            if rest != zero and int(self.best[rest]) > NEG and int(self.best[rest]) + self.pvals[r] == target:
                return sorted([r, *self._max_parts(rest)], reverse=True)
        raise AssertionError("knapsack table inconsistent")  # pragma: no cover

    def _max_parts(self, b: Vector) -> list[Vector]:
        parts = []
        zero = (0,) * len(b)
        while b != zero:
            val = int(self.best[b])
            for r in self.trivial:
                if _leq(r, b):
                    rest = _sub(b, r)
                    if int(self.best[rest]) > NEG and int(self.best[rest]) + self.pvals[r] == val:
                        parts.append(r)
                        b = rest
                        break
            else:  # pragma: no cover
                raise AssertionError("knapsack table inconsistent")
        return parts

    def pairing_violation(self, a: Sequence[int]) -> Vector | None:
        """A split ``b`` with ``b, a-b`` in ``NR_q`` and ``(b, a-b) > -2``, if any."""
        a = self._inside(a)
        sub = tuple(slice(0, x + 1) for x in a)
        flip = tuple(slice(x, None, -1) if x else slice(0, 1) for x in a)
        mask = self.reachable[sub] & self.reachable[flip]
        if not mask.any():
            return None
        cartan = self.quiver.cartan
        ca = [sum(c * x for c, x in zip(row, a)) for row in cartan]
        vals = sum(g[sub] * c for g, c in zip(self.grid, ca)) - 2 * self.tits[sub]
        bad = mask & (vals > -2)
        if not bad.any():
            return None
        return tuple(int(x) for x in np.argwhere(bad)[0])

    def sigma_by_pairing(self, a: Sequence[int]) -> bool:
        a = self._inside(a)
        if not self.reachable[a]:
            return False
        return self.pairing_violation(a) is None


# -- explicit enumeration --------------------------------------------------------


def enumerate_decompositions(
    a: Sequence[int], parts: Sequence[Sequence[int]], max_count: int | None = None
) -> Iterator[list[Vector]]:
    """Multisets of ``parts`` summing to ``a``, each listed in non-increasing order.

    Raises :class:`GuardExceeded` once more than ``max_count`` multisets have
    been produced.
    """
    a = tuple(a)
    pool = sorted({tuple(p) for p in parts if any(p) and _leq(p, a)}, reverse=True)
    # support still coverable by pool[i:]
    cover = [frozenset()] * (len(pool) + 1)
    for i in range(len(pool) - 1, -1, -1):
        cover[i] = cover[i + 1] | {v for v, x in enumerate(pool[i]) if x}
    count = 0
    stack: list[Vector] = []

    def rec(rest: Vector, start: int) -> Iterator[list[Vector]]:
        nonlocal count
        if not any(rest):
            count += 1
            if max_count is not None and count > max_count:
                raise GuardExceeded("decompositions", count, max_count)
            yield list(stack)
            return
        need = {v for v, x in enumerate(rest) if x}
        if not need <= cover[start]:
            return
        for i in range(start, len(pool)):
            r = pool[i]
            if _leq(r, rest):
                stack.append(r)
                yield from rec(_sub(rest, r), i)
                stack.pop()

    yield from rec(a, 0)


# -- spec-level operations ---------------------------------------------------------


def in_Rq(quiver: StarQuiver, a: Sequence[int], q: CharacterQ) -> bool:
    if not any(a) or any(x < 0 for x in a):
        return False
    return quiver.is_positive_root(a) and q_pow(q, a).is_one()


def in_NRq(quiver: StarQuiver, a: Sequence[int], q: CharacterQ, max_box: int = DEFAULT_MAX_BOX) -> bool:
    return RootTable(quiver, q, a, max_box).in_NRq(a)


def sigma_by_definition(
    quiver: StarQuiver,
    a: Sequence[int],
    q: CharacterQ,
    method: str = "dp",
    guards: Guards = Guards(),
) -> bool:
    """Membership of ``a`` in ``Sigma_q`` straight from the definition.

    ``method="dp"`` maximises the sum of ``p`` over decompositions with a
    knapsack table; ``method="enumerate"`` lists every multiset of roots
    (bounded by ``guards.max_decomps``).
    """
    if method == "dp":
        return RootTable(quiver, q, a, guards.max_box).sigma_by_definition(a)
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    if not in_Rq(quiver, a, q):
        return False
    parts = [r for r in quiver.positive_roots_below(a, guards.max_box) if q_pow(q, r).is_one() and r != tuple(a)]
    pa = quiver.p(a)
    for dec in enumerate_decompositions(a, parts, guards.max_decomps):
        if sum(quiver.p(r) for r in dec) >= pa:
            return False
    return True


def sigma_by_pairing(quiver: StarQuiver, a: Sequence[int], q: CharacterQ, guards: Guards = Guards()) -> bool:
    if any(x < 0 for x in a):
        raise ValueError("pairing criterion is only defined for non-negative vectors")
    return RootTable(quiver, q, a, guards.max_box).sigma_by_pairing(a)


# -- verdicts ------------------------------------------------------------------------


class Status(enum.Enum):
    SOLVABLE = "solvable"
    UNSOLVABLE = "unsolvable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class NotPositiveRoot:
    alpha: Vector


@dataclass(frozen=True)
class NotStrict:
    alpha: Vector


@dataclass(frozen=True)
class CharacterNotOne:
    value: MValue


@dataclass(frozen=True)
class ViolatingDecomposition:
    parts: tuple[Vector, ...]
    p_alpha: int
    p_parts: tuple[int, ...]


@dataclass(frozen=True)
class EncodingUnsupported:
    reason: str


@dataclass(frozen=True)
class GuardHit:
    guard: str
    required: int
    limit: int


Certificate = NotPositiveRoot | NotStrict | CharacterNotOne | ViolatingDecomposition | EncodingUnsupported | GuardHit


@dataclass
class Verdict:
    status: Status
    alpha: Vector
    certificate: Certificate | None = None
    p_alpha: int | None = None
    character: MValue | None = None
    guards_hit: list[str] = field(default_factory=list)
    elapsed: float = 0.0


def decide_pair(
    quiver: StarQuiver, q: CharacterQ, alpha: Sequence[int], guards: Guards = Guards(), method: str = "dp"
) -> Verdict:
    """Decide ``alpha in Sigma_q`` by both criteria.

    ``method`` selects how the definition side is evaluated (see
    :func:`sigma_by_definition`); the pairing side always scans the box.
    """
    t0 = time.perf_counter()
    alpha = tuple(alpha)
    v = Verdict(Status.UNSOLVABLE, alpha, p_alpha=quiver.p(alpha), character=q_pow(q, alpha).inverse())

    def done(status: Status, cert: Certificate | None = None) -> Verdict:
        v.status, v.certificate = status, cert
        v.elapsed = time.perf_counter() - t0
        return v

    if not any(alpha) or any(x < 0 for x in alpha) or quiver.root_kind(alpha) is RootKind.NOT_ROOT:
        return done(Status.UNSOLVABLE, NotPositiveRoot(alpha))
    if not v.character.is_one():
        return done(Status.UNSOLVABLE, CharacterNotOne(v.character))
    try:
        table = RootTable(quiver, q, alpha, guards.max_box)
    except GuardExceeded as exc:
        v.guards_hit.append(exc.guard)
        return done(Status.UNKNOWN, GuardHit(exc.guard, exc.required, exc.limit))
    if method == "dp":
        by_def = table.sigma_by_definition(alpha)
    else:
        try:
            by_def = sigma_by_definition(quiver, alpha, q, method, guards)
        except GuardExceeded as exc:
            v.guards_hit.append(exc.guard)
            return done(Status.UNKNOWN, GuardHit(exc.guard, exc.required, exc.limit))
    by_pair = table.sigma_by_pairing(alpha)
    if by_def != by_pair:
        raise PathDisagreement(f"alpha={alpha} q={q}: definition={by_def} pairing={by_pair}")
    if by_def:
        return done(Status.SOLVABLE)
    parts = table.violating_decomposition(alpha)
    cert = ViolatingDecomposition(tuple(parts), quiver.p(alpha), tuple(quiver.p(r) for r in parts))
    return done(Status.UNSOLVABLE, cert)


def decide_dsp(inst: ProblemInstance, guards: Guards = Guards(), method: str = "dp") -> Verdict:
    """Decide whether the classes described by ``inst`` admit an irreducible solution."""
    t0 = time.perf_counter()
    quiver, alpha = inst.quiver, inst.alpha
    try:
        q = q_from_xi(quiver, inst.xi)
    except EncodingError as exc:
        return Verdict(Status.UNKNOWN, alpha, EncodingUnsupported(str(exc)))
    if not quiver.is_strict(alpha) or alpha[0] < 1:
        v = Verdict(Status.UNSOLVABLE, alpha, NotStrict(alpha), p_alpha=quiver.p(alpha))
        v.character = xi_char(quiver, inst.xi, alpha)
        v.elapsed = time.perf_counter() - t0
        return v
    v = decide_pair(quiver, q, alpha, guards, method)
    # xi^[alpha] = 1 / q^alpha, which decide_pair already reports
    v.elapsed = time.perf_counter() - t0
    return v
