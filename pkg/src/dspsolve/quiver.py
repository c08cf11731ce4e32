"""Star-shaped quivers, their root lattice and Kac root system.

Vertices are indexed by position: index 0 is the central vertex ``*`` and the
arm vertices ``[i, j]`` follow arm by arm (``i`` and ``j`` are 1-based, as in
the usual notation).  Lattice vectors are plain tuples of ints in that order.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

Vector = tuple[int, ...]
Vertex = str | tuple[int, int]

CENTER = "*"
DEFAULT_MAX_BOX = 10**7


class BoxTooLarge(ValueError):
    """A box scan would exceed its configured volume limit."""

    def __init__(self, volume: int, limit: int):
        super().__init__(f"box volume {volume} exceeds limit {limit}")
        self.volume = volume
        self.limit = limit


class RootKind(enum.Enum):
    NOT_ROOT = "not_root"
    REAL = "real"
    IMAGINARY = "imaginary"


class QuiverKind(enum.Enum):
    DYNKIN = "dynkin"
    EXTENDED_DYNKIN = "extended_dynkin"
    WILD = "wild"


@dataclass(frozen=True)
class QuiverClass:
    kind: QuiverKind
    name: str | None = None
    delta: Vector | None = None
    extending_vertices: tuple[Vertex, ...] = ()


def vertex_label(v: Vertex) -> str:
    return CENTER if v == CENTER else f"{v[0]},{v[1]}"


def parse_vertex(text: str) -> Vertex:
    text = text.strip().strip("[]")
    if text == CENTER:
        return CENTER
    try:
        i, j = (int(s) for s in text.split(","))
    except ValueError:
        raise ValueError(f"bad vertex label {text!r}; expected '*' or 'i,j'") from None
    return (i, j)


def _dynkin_name(arms: Sequence[int]) -> str | None:
    """Name of a star with the given arm lengths (number of non-central vertices)."""
    legs = sorted((a for a in arms if a > 0), reverse=True)
    n = 1 + sum(legs)
    if len(legs) <= 2:
        return f"A{n}"
    if len(legs) == 3:
        a, b, c = legs
        if b == c == 1:
            return f"D{n}"
        return {(2, 2, 1): "E6", (3, 2, 1): "E7", (4, 2, 1): "E8"}.get((a, b, c))
    return None


_EXTENDED_NAMES = {(1, 1, 1, 1): "D~4", (2, 2, 2): "E~6", (3, 3, 1): "E~7", (5, 2, 1): "E~8"}


@dataclass(frozen=True)
class StarQuiver:
    """The star quiver with arms of lengths ``w_i - 1`` pointing towards ``*``."""

    weights: tuple[int, ...]

    def __post_init__(self) -> None:
        ws = tuple(self.weights)
        if len(ws) < 1:
            raise ValueError("weight sequence must have at least one entry")
        if any(not isinstance(w, int) or w < 1 for w in ws):
            raise ValueError(f"weights must be integers >= 1, got {ws}")
        object.__setattr__(self, "weights", ws)

    # -- structure -------------------------------------------------------

    @cached_property
    def vertices(self) -> tuple[Vertex, ...]:
        vs: list[Vertex] = [CENTER]
        for i, w in enumerate(self.weights, start=1):
            vs.extend((i, j) for j in range(1, w))
        return tuple(vs)

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: n for n, v in enumerate(self.vertices)}

    @property
    def size(self) -> int:
        return len(self.vertices)

    @cached_property
    def arrows(self) -> tuple[tuple[int, int], ...]:
        """Arrows as (tail, head) index pairs: ``[i,1] -> *`` and ``[i,j+1] -> [i,j]``."""
        out = []
        for i, w in enumerate(self.weights, start=1):
            for j in range(1, w):
                head = 0 if j == 1 else self.index[(i, j - 1)]
                out.append((self.index[(i, j)], head))
        return tuple(out)

    @cached_property
    def neighbours(self) -> tuple[tuple[int, ...], ...]:
        nb: list[list[int]] = [[] for _ in self.vertices]
        for t, h in self.arrows:
            nb[t].append(h)
            nb[h].append(t)
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def cartan(self) -> tuple[tuple[int, ...], ...]:
        """Matrix of the symmetrized form on simple roots."""
        n = self.size
        c = [[0] * n for _ in range(n)]
        for v in range(n):
            c[v][v] = 2
        for t, h in self.arrows:
            c[t][h] -= 1
            c[h][t] -= 1
        return tuple(tuple(r) for r in c)

    def arm(self, i: int) -> tuple[int, ...]:
        """Indices of the vertices on arm ``i`` (1-based), ordered away from ``*``."""
        return tuple(self.index[(i, j)] for j in range(1, self.weights[i - 1]))

    def unit(self, v: Vertex | int) -> Vector:
        k = v if isinstance(v, int) else self.index[v]
        return tuple(1 if n == k else 0 for n in range(self.size))

    def zero(self) -> Vector:
        return (0,) * self.size

    def vector(self, coords: dict[Vertex, int] | Sequence[int]) -> Vector:
        if isinstance(coords, dict):
            out = [0] * self.size
            for v, n in coords.items():
                if isinstance(v, str):
                    v = parse_vertex(v)
                if v not in self.index:
                    raise KeyError(f"vertex {vertex_label(v)} not in quiver {self.weights}")
                out[self.index[v]] = int(n)
            return tuple(out)
        self._check(coords)
        return tuple(int(x) for x in coords)

    def _check(self, *vs: Sequence[int]) -> None:
        for a in vs:
            if len(a) != self.size:
                raise ValueError(f"vector of length {len(a)} does not match {self.size} vertices")

    # -- forms -----------------------------------------------------------

    def euler(self, a: Sequence[int], b: Sequence[int]) -> int:
        self._check(a, b)
        return sum(x * y for x, y in zip(a, b)) - sum(a[t] * b[h] for t, h in self.arrows)

    def sym(self, a: Sequence[int], b: Sequence[int]) -> int:
        self._check(a, b)
        return self.euler(a, b) + self.euler(b, a)

    def tits(self, a: Sequence[int]) -> int:
        return self.euler(a, a)

    def p(self, a: Sequence[int]) -> int:
        return 1 - self.tits(a)

    def pairing(self, a: Sequence[int], v: int) -> int:
        """``sym(a, e_v)`` without building the unit vector."""
        return 2 * a[v] - sum(a[u] for u in self.neighbours[v])

    def reflect(self, v: Vertex | int, a: Sequence[int]) -> Vector:
        k = v if isinstance(v, int) else self.index[v]
        self._check(a)
        out = list(a)
        out[k] -= self.pairing(a, k)
        return tuple(out)

    # -- roots -----------------------------------------------------------

    def support(self, a: Sequence[int]) -> tuple[int, ...]:
        return tuple(v for v, x in enumerate(a) if x != 0)

    def components(self, vertices: Iterable[int]) -> list[tuple[int, ...]]:
        """Connected components of the full subquiver on ``vertices``."""
        left = set(vertices)
        comps = []
        while left:
            start = min(left)
            stack, seen = [start], {start}
            while stack:
                u = stack.pop()
                for x in self.neighbours[u]:
                    if x in left and x not in seen:
                        seen.add(x)
                        stack.append(x)
            left -= seen
            comps.append(tuple(sorted(seen)))
        return comps

    def is_connected(self, vertices: Iterable[int]) -> bool:
        return len(self.components(vertices)) == 1

    def root_kind(self, a: Sequence[int]) -> RootKind:
        """Classify ``a`` as a positive real root, positive imaginary root or neither.

        Reflects at the smallest vertex with positive pairing until either a
        simple root, a vector with a negative entry, or a vector with no
        positive pairing is reached.
        """
        self._check(a)
        if not any(a):
            raise ValueError("the zero vector is not a root")
        return self._root_kind(tuple(a))

    @lru_cache(maxsize=1 << 18)
    def _root_kind(self, a: Vector) -> RootKind:
        cur = list(a)
        while True:
            if any(x < 0 for x in cur):
                return RootKind.NOT_ROOT
            if sum(cur) == 1:
                return RootKind.REAL
            for v in range(self.size):
                s = self.pairing(cur, v)
                if s > 0:
                    cur[v] -= s
                    break
            else:
                if self.is_connected(self.support(cur)):
                    return RootKind.IMAGINARY
                return RootKind.NOT_ROOT

    def is_positive_root(self, a: Sequence[int]) -> bool:
        return self.root_kind(a) is not RootKind.NOT_ROOT

    def positive_roots_below(self, a: Sequence[int], max_box: int = DEFAULT_MAX_BOX) -> list[Vector]:
        """All positive roots ``b`` with ``0 < b <= a``, in lexicographic order."""
        self._check(a)
        if any(x < 0 for x in a):
            raise ValueError("bound must be non-negative")
        volume = math.prod(x + 1 for x in a)
        if volume > max_box:
            raise BoxTooLarge(volume, max_box)
        return list(self._roots_in_box(tuple(a)))

    @lru_cache(maxsize=256)
    def _roots_in_box(self, a: Vector) -> tuple[Vector, ...]:
        return tuple(b for b in box(a) if any(b) and self._root_kind(b) is not RootKind.NOT_ROOT)

    # -- classification ----------------------------------------------------

    @cached_property
    def arm_lengths(self) -> tuple[int, ...]:
        return tuple(w - 1 for w in self.weights)

    def classify(self) -> QuiverClass:
        k = len(self.weights)
        total = sum(Fraction(1, w) for w in self.weights)
        if total > k - 2:
            return QuiverClass(QuiverKind.DYNKIN, _dynkin_name(self.arm_lengths))
        if total < k - 2:
            return QuiverClass(QuiverKind.WILD)
        delta = self.minimal_imaginary_root()
        ext = tuple(self.vertices[v] for v, x in enumerate(delta) if x == 1)
        name = _EXTENDED_NAMES.get(tuple(sorted((a for a in self.arm_lengths if a), reverse=True)))
        return QuiverClass(QuiverKind.EXTENDED_DYNKIN, name, delta, ext)

    def minimal_imaginary_root(self) -> Vector:
        """``delta`` for an extended Dynkin star: ``delta_* = lcm(w)``, linear decay along arms."""
        m = math.lcm(*self.weights)
        out = [m]
        for w in self.weights:
            out.extend(m * (w - j) // w for j in range(1, w))
        delta = tuple(out)
        if self.tits(delta) != 0:
            raise ValueError(f"{self.weights} is not of extended Dynkin type")
        return delta

    def is_strict(self, a: Sequence[int]) -> bool:
        self._check(a)
        for i in range(1, len(self.weights) + 1):
            prev = a[0]
            for v in self.arm(i):
                if a[v] > prev:
                    return False
                prev = a[v]
            if prev < 0:
                return False
        return a[0] >= 0

    def restrict(self, a: Sequence[int], vertices: Iterable[int]) -> Vector:
        keep = set(vertices)
        return tuple(x if v in keep else 0 for v, x in enumerate(a))

    def subquiver(self, vertices: Iterable[int]) -> tuple["StarQuiver", tuple[int, ...]]:
        """The connected full subquiver on ``vertices`` as a star, with its embedding.

        Returns ``(sub, emb)`` where ``emb[u]`` is the index in this quiver of
        vertex ``u`` of ``sub``.  A segment of a single arm is presented as a
        one-armed star (a path); the forms used for roots do not see arrow
        orientation, so this is harmless.
        """
        vs = set(vertices)
        if not vs or not self.is_connected(vs):
            raise ValueError("subquiver vertex set must be non-empty and connected")
        if 0 in vs:
            emb = [0]
            weights = []
            for i in range(1, len(self.weights) + 1):
                leg = [v for v in self.arm(i) if v in vs]
                if leg:
                    weights.append(len(leg) + 1)
                    emb.extend(leg)
            return StarQuiver(tuple(weights) or (1,)), tuple(emb)
        path = sorted(vs)
        return StarQuiver((len(path),)), tuple(path)


def box(bound: Sequence[int]) -> Iterator[Vector]:
    return itertools.product(*(range(x + 1) for x in bound))
