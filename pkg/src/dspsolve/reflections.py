"""Admissible reflections on pairs ``[q, alpha]`` and the reduced shapes.

A reflection at ``v`` is admissible for ``[q, alpha]`` when ``q_v != 1``; it
sends the pair to ``[u_v(q), s_v(alpha)]`` with

    u_v(q)_i = q_i * q_v ** -(e_i, e_v)

This is the convention for which ``u_v(q) ** s_v(b) == q ** b`` for every
lattice vector ``b``; the identity is checked in the test suite.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .quiver import QuiverKind, StarQuiver, Vector
from .spectral import CharacterQ, q_pow


@dataclass(frozen=True)
class Pair:
    q: CharacterQ
    alpha: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(self.alpha))
        if len(self.alpha) != len(self.q):
            raise ValueError("character and vector have different lengths")


class InadmissibleReflection(ValueError):
    pass


def admissible(v: int, pair: Pair) -> bool:
    return not pair.q[v].is_one()


def reflect_character(quiver: StarQuiver, v: int, q: CharacterQ) -> CharacterQ:
    qv = q[v]
    row = quiver.cartan[v]
    return CharacterQ(tuple(x * qv ** (-row[i]) if row[i] else x for i, x in enumerate(q.values)))


def reflect_pair(quiver: StarQuiver, v: int, pair: Pair) -> Pair:
    if not admissible(v, pair):
        raise InadmissibleReflection(f"q at vertex {quiver.vertices[v]} is 1")
    return Pair(reflect_character(quiver, v, pair.q), quiver.reflect(v, pair.alpha))


def orbit_explore(quiver: StarQuiver, pair: Pair, depth: int) -> set[Pair]:
    """Pairs reachable from ``pair`` by at most ``depth`` admissible reflections."""
    return _bfs(quiver, pair, depth)[0]


def _bfs(quiver: StarQuiver, pair: Pair, depth: int) -> tuple[set[Pair], bool]:
    """Breadth-first orbit search; also reports whether the orbit closed."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    seen = {pair}
    frontier = [pair]
    for _ in range(depth):
        nxt = []
        for p in frontier:
            for v in range(quiver.size):
                if admissible(v, p):
                    r = reflect_pair(quiver, v, p)
                    if r not in seen:
                        seen.add(r)
                        nxt.append(r)
        if not nxt:
            return seen, True
        frontier = nxt
    # closed only if nothing new is reachable from the last layer either
    closed = all(
        reflect_pair(quiver, v, p) in seen for p in frontier for v in range(quiver.size) if admissible(v, p)
    )
    return seen, closed


class Tri(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


def fq_violation(quiver: StarQuiver, pair: Pair) -> int | None:
    """A vertex ``i`` with ``q_i = 1`` and ``(alpha, e_i) > 0``, if any."""
    for i in range(quiver.size):
        if pair.q[i].is_one() and quiver.pairing(pair.alpha, i) > 0:
            return i
    return None


def in_Fq(quiver: StarQuiver, pair: Pair, depth: int) -> Tri:
    """Semi-decision for the pair's root lying in F_q.

    ``NO`` as soon as some equivalent pair has a vertex with trivial ``q``
    and positive pairing; ``YES`` only when the whole orbit was explored.
    """
    orbit, closed = _bfs(quiver, pair, depth)
    if any(fq_violation(quiver, p) is not None for p in orbit):
        return Tri.NO
    return Tri.YES if closed else Tri.UNKNOWN


# -- reduced cases ----------------------------------------------------------------


@dataclass(frozen=True)
class CaseI:
    m: int
    h: int
    delta: Vector


@dataclass(frozen=True)
class CaseII:
    i: int
    j: int
    beta: Vector
    gamma: Vector


@dataclass(frozen=True)
class CaseIII:
    h: int
    delta: Vector
    j: int
    k: int


ReducedCase = CaseI | CaseII | CaseIII | None


def _extended_delta(quiver: StarQuiver, vertices: Sequence[int]) -> tuple[Vector, tuple[int, ...]] | None:
    """``delta`` of the full subquiver on ``vertices`` (in ambient coordinates) and
    its extending vertices, when that subquiver is extended Dynkin."""
    sub, emb = quiver.subquiver(vertices)
    cls = sub.classify()
    if cls.kind is not QuiverKind.EXTENDED_DYNKIN:
        return None
    delta = [0] * quiver.size
    for u, x in enumerate(cls.delta):
        delta[emb[u]] = x
    ext = tuple(emb[u] for u, x in enumerate(cls.delta) if x == 1)
    return tuple(delta), ext


def _multiple(a: Sequence[int], d: Sequence[int]) -> int | None:
    ratios = {x // y for x, y in zip(a, d) if y}
    if len(ratios) != 1:
        return None
    h = ratios.pop()
    return h if all(x == h * y for x, y in zip(a, d)) else None


def _side(quiver: StarQuiver, vertices: set[int], start: int, cut: int) -> set[int]:
    """Vertices of ``vertices`` reachable from ``start`` without crossing ``cut``."""
    seen, stack = {start}, [start]
    while stack:
        u = stack.pop()
        for x in quiver.neighbours[u]:
            if x in vertices and x not in seen and not (u == start and x == cut):
                seen.add(x)
                stack.append(x)
    return seen


def classify_case(quiver: StarQuiver, pair: Pair) -> ReducedCase:
    """Recognise the three reduced shapes on the support quiver of ``pair.alpha``."""
    a = pair.alpha
    if any(x < 0 for x in a) or not any(a):
        return None
    supp = set(quiver.support(a))
    if not quiver.is_connected(supp):
        return None

    ext = _extended_delta(quiver, supp)
    if ext is not None:
        delta, _ = ext
        c = _multiple(a, delta)
        m = q_pow(pair.q, delta).order()
        if c is not None and m is not None and c % m == 0 and c // m >= 2:
            return CaseI(m, c // m, delta)

    edges = [(t, h) for t, h in quiver.arrows if t in supp and h in supp]
    for t, h in edges:
        if a[t] == a[h] == 1:
            left = _side(quiver, supp, t, h)
            beta = quiver.restrict(a, left)
            gamma = tuple(x - y for x, y in zip(a, beta))
            if q_pow(pair.q, beta).is_one() and q_pow(pair.q, gamma).is_one():
                return CaseII(t, h, beta, gamma)

    for t, h in edges:
        for j, k in ((t, h), (h, t)):
            if a[j] != 1:
                continue
            part = _side(quiver, supp, k, j)
            ext = _extended_delta(quiver, part)
            if ext is None or k not in ext[1]:
                continue
            delta, _ = ext
            hmul = _multiple(quiver.restrict(a, part), delta)
            if hmul is not None and hmul >= 2 and q_pow(pair.q, delta).is_one():
                return CaseIII(hmul, delta, j, k)
    return None
