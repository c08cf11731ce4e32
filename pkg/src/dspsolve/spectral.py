"""Exact multiplicative scalars and eigenvalue data.

Two encodings of non-zero scalars are supported:

* :class:`Cyclo` -- ``r * exp(2*pi*i*t)`` with ``r`` a positive rational and
  ``t`` a rational taken mod 1.  Covers every rational number and every
  rational multiple of a root of unity.
* :class:`Sym` -- a monomial ``g1^e1 * g2^e2 * ...`` in free generators,
  modulo a lattice of exponent vectors declared to equal 1.

Only the multiplicative group structure is implemented.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .quiver import StarQuiver, Vector


class EncodingError(ValueError):
    """Values from different encodings (or relation lattices) were combined."""


class NotRealizable(ValueError):
    """No matrix has the requested rank data."""


class AnnihilationError(ValueError):
    def __init__(self, arm: int, detail: str = ""):
        super().__init__(f"arm {arm}: matrix is not annihilated by its eigenvalue polynomial{detail}")
        self.arm = arm


# -- Cyclo ---------------------------------------------------------------


@dataclass(frozen=True)
class Cyclo:
    magnitude: Fraction
    angle: Fraction

    def __post_init__(self) -> None:
        mag = Fraction(self.magnitude)
        if mag <= 0:
            raise ValueError("magnitude must be positive")
        object.__setattr__(self, "magnitude", mag)
        object.__setattr__(self, "angle", Fraction(self.angle) % 1)

    @classmethod
    def rational(cls, r: Fraction | int | str) -> "Cyclo":
        r = Fraction(r)
        if r == 0:
            raise ValueError("zero is not a valid multiplicative value")
        return cls(abs(r), Fraction(1, 2) if r < 0 else Fraction(0))

    @classmethod
    def root_of_unity(cls, a: int, b: int = 1) -> "Cyclo":
        return cls(Fraction(1), Fraction(a, b))

    def one(self) -> "Cyclo":
        return ONE

    def __mul__(self, other: "MValue") -> "Cyclo":
        if not isinstance(other, Cyclo):
            raise EncodingError("cannot combine cyclo and sym values")
        return Cyclo(self.magnitude * other.magnitude, self.angle + other.angle)

    def __truediv__(self, other: "MValue") -> "Cyclo":
        return self * other.inverse()

    def inverse(self) -> "Cyclo":
        return Cyclo(1 / self.magnitude, -self.angle)

    def __pow__(self, e: int) -> "Cyclo":
        return Cyclo(self.magnitude**e, self.angle * e)

    def is_one(self) -> bool:
        return self.magnitude == 1 and self.angle == 0

    def order(self) -> int | None:
        """Multiplicative order, or ``None`` when infinite."""
        if self.magnitude != 1:
            return None
        return self.angle.denominator

    def is_rational(self) -> bool:
        return self.angle in (0, Fraction(1, 2))

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.magnitude if self.angle == 0 else -self.magnitude

    def __complex__(self) -> complex:
        return float(self.magnitude) * cmath.exp(2j * math.pi * float(self.angle))

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.to_fraction())
        z = f"zeta({self.angle})"
        return z if self.magnitude == 1 else f"{self.magnitude}*{z}"


ONE = Cyclo(Fraction(1), Fraction(0))


# -- Sym -----------------------------------------------------------------


def _hermite_rows(rows: Sequence[Sequence[int]], ncols: int) -> tuple[tuple[int, ...], ...]:
    """Row-style Hermite normal form of the integer row span."""
    a = [list(r) for r in rows if any(r)]
    r = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(r, len(a)) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[piv] = a[piv], a[r]
            done = True
            for i in range(r + 1, len(a)):
                if a[i][c]:
                    f = a[i][c] // a[r][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if r < len(a) and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                f = a[i][c] // a[r][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            r += 1
    return tuple(tuple(row) for row in a[:r])


@dataclass(frozen=True)
class RelationLattice:
    """Exponent vectors declared equal to 1, over ``ngens`` generators."""

    ngens: int
    rows: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        for r in rows:
            if len(r) != self.ngens:
                raise ValueError(f"relation {r} has {len(r)} entries, expected {self.ngens}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_hnf", _hermite_rows(rows, self.ngens))

    @property
    def hnf(self) -> tuple[tuple[int, ...], ...]:
        return self._hnf  # type: ignore[attr-defined]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RelationLattice) and (self.ngens, self.hnf) == (other.ngens, other.hnf)

    def __hash__(self) -> int:
        return hash((self.ngens, self.hnf))

    @staticmethod
    def _pivot(row: Sequence[int]) -> int:
        return next(c for c, x in enumerate(row) if x)

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of ``v`` modulo the lattice."""
        out = list(v)
        for row in self.hnf:
            c = self._pivot(row)
            f = out[c] // row[c]
            if f:
                out = [x - f * y for x, y in zip(out, row)]
        return tuple(out)

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def order(self, v: Sequence[int]) -> int | None:
        """Least ``m >= 1`` with ``m*v`` in the lattice, or ``None``."""
        rest = [Fraction(x) for x in v]
        coeffs = []
        for row in self.hnf:
            c = self._pivot(row)
            x = rest[c] / row[c]
            coeffs.append(x)
            rest = [a - x * b for a, b in zip(rest, row)]
        if any(rest):
            return None
        return reduce(math.lcm, (x.denominator for x in coeffs), 1)

    def with_relation(self, row: Sequence[int]) -> "RelationLattice":
        return RelationLattice(self.ngens, self.rows + (tuple(row),))


@dataclass(frozen=True)
class Sym:
    exponents: tuple[int, ...]
    lattice: RelationLattice

    def __post_init__(self) -> None:
        if len(self.exponents) != self.lattice.ngens:
            raise ValueError("exponent vector length does not match generator count")
        object.__setattr__(self, "exponents", self.lattice.reduce(self.exponents))

    @classmethod
    def generator(cls, i: int, lattice: RelationLattice) -> "Sym":
        """The generator ``g_i`` (1-based)."""
        return cls(tuple(1 if n == i - 1 else 0 for n in range(lattice.ngens)), lattice)

    def one(self) -> "Sym":
        return Sym((0,) * self.lattice.ngens, self.lattice)

    def _same(self, other: "MValue") -> "Sym":
        if not isinstance(other, Sym):
            raise EncodingError("cannot combine cyclo and sym values")
        if other.lattice != self.lattice:
            raise EncodingError("sym values over different relation lattices")
        return other

    def __mul__(self, other: "MValue") -> "Sym":
        o = self._same(other)
        return Sym(tuple(a + b for a, b in zip(self.exponents, o.exponents)), self.lattice)

    def __truediv__(self, other: "MValue") -> "Sym":
        return self * other.inverse()

    def inverse(self) -> "Sym":
        return Sym(tuple(-a for a in self.exponents), self.lattice)

    def __pow__(self, e: int) -> "Sym":
        return Sym(tuple(a * e for a in self.exponents), self.lattice)

    def is_one(self) -> bool:
        return not any(self.exponents)

    def order(self) -> int | None:
        return self.lattice.order(self.exponents)

    def __str__(self) -> str:
        parts = []
        for i, e in enumerate(self.exponents, start=1):
            if e == 1:
                parts.append(f"g{i}")
            elif e:
                parts.append(f"g{i}^{e}")
        return "*".join(parts) or "1"


MValue = Union[Cyclo, Sym]


def order_of(v: MValue) -> int | None:
    return v.order()


# -- text syntax -----------------------------------------------------------

_RAT = r"\d+(?:/\d+)?"
_CYCLO_RE = re.compile(
    rf"^(?P<sign>-)?\s*(?:(?P<mag>{_RAT})\s*(?:\*\s*zeta\(\s*(?P<a1>-?{_RAT})\s*\))?"
    rf"|zeta\(\s*(?P<a2>-?{_RAT})\s*\))$"
)
_SYM_FACTOR_RE = re.compile(r"^g(?P<i>\d+)(?:\^(?P<e>-?\d+))?$")


def parse_cyclo(text: str) -> Cyclo:
    """Parse ``r``, ``-r``, ``zeta(a/b)`` or ``r*zeta(a/b)``."""
    m = _CYCLO_RE.match(str(text).strip())
    if not m:
        raise ValueError(f"cannot parse cyclo value {text!r}; expected r, r*zeta(a/b) or zeta(a/b)")
    try:
        mag = Fraction(m["mag"]) if m["mag"] else Fraction(1)
        angle = Fraction(m["a1"] or m["a2"] or 0)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None
    if mag == 0:
        raise ValueError("zero is not a valid eigenvalue")
    if m["sign"]:
        angle += Fraction(1, 2)
    return Cyclo(mag, angle)


def parse_sym(text: str, lattice: RelationLattice) -> Sym:
    """Parse ``1`` or a product of factors ``g<i>`` / ``g<i>^<e>``."""
    text = str(text).replace(" ", "")
    exps = [0] * lattice.ngens
    if text != "1":
        for factor in text.split("*"):
            m = _SYM_FACTOR_RE.match(factor)
            if not m:
                raise ValueError(f"cannot parse sym factor {factor!r} in {text!r}")
            i = int(m["i"])
            if not 1 <= i <= lattice.ngens:
                raise ValueError(f"generator g{i} out of range 1..{lattice.ngens}")
            exps[i - 1] += int(m["e"] or 1)
    return Sym(tuple(exps), lattice)


def sym_generator_count(texts: Sequence[str]) -> int:
    return max((int(i) for t in texts for i in re.findall(r"g(\d+)", str(t))), default=0)


# -- eigenvalue tables -------------------------------------------------------


@dataclass(frozen=True)
class XiTable:
    """Eigenvalue data: arm ``i`` carries ``w_i`` values."""

    rows: tuple[tuple[MValue, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows or not rows[0]:
            raise ValueError("xi table must have at least one non-empty arm")
        kinds = {type(x) for r in rows for x in r}
        if len(kinds) > 1:
            raise EncodingError("xi table mixes cyclo and sym values")
        if kinds == {Sym} and len({x.lattice for r in rows for x in r}) > 1:
            raise EncodingError("xi table uses several relation lattices")

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.rows)

    @property
    def mode(self) -> str:
        return "sym" if isinstance(self.rows[0][0], Sym) else "cyclo"

    def one(self) -> MValue:
        return self.rows[0][0].one()

    def check(self, quiver: StarQuiver) -> None:
        if self.weights != quiver.weights:
            raise ValueError(f"xi arm lengths {self.weights} do not match weights {quiver.weights}")


def _prod(values, one: MValue) -> MValue:
    out = one
    for v in values:
        out = out * v
    return out


def xi_char(quiver: StarQuiver, xi: XiTable, a: Sequence[int]) -> MValue:
    """``prod_{i,j} xi_ij ** (n_{i,j-1} - n_ij)`` with ``n_{i0} = n_*`` and ``n_{i,w_i} = 0``."""
    xi.check(quiver)
    quiver._check(a)
    out = xi.one()
    for i, row in enumerate(xi.rows, start=1):
        coords = [a[0]] + [a[v] for v in quiver.arm(i)] + [0]
        for j, x in enumerate(row):
            e = coords[j] - coords[j + 1]
            if e:
                out = out * x**e
    return out


@dataclass(frozen=True)
class CharacterQ:
    """One non-zero scalar per quiver vertex."""

    values: tuple[MValue, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))

    def __getitem__(self, v: int) -> MValue:
        return self.values[v]

    def __len__(self) -> int:
        return len(self.values)

    def one(self) -> MValue:
        return self.values[0].one()

    def restrict(self, emb: Sequence[int]) -> "CharacterQ":
        return CharacterQ(tuple(self.values[v] for v in emb))

    def __str__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.values) + ")"


def q_from_xi(quiver: StarQuiver, xi: XiTable) -> CharacterQ:
    """``q_* = 1 / prod_i xi_i1`` and ``q_ij = xi_ij / xi_{i,j+1}``."""
    xi.check(quiver)
    vals: list[MValue] = [_prod((r[0] for r in xi.rows), xi.one()).inverse()]
    for row in xi.rows:
        vals.extend(row[j - 1] / row[j] for j in range(1, len(row)))
    return CharacterQ(tuple(vals))


def q_pow(q: CharacterQ, a: Sequence[int]) -> MValue:
    if len(a) != len(q):
        raise ValueError("vector length does not match character")
    if all(isinstance(x, Cyclo) for x in q.values):
        # accumulate magnitude and angle directly to build one value
        mag, ang = Fraction(1), Fraction(0)
        for x, e in zip(q.values, a):
            if e:
                mag *= x.magnitude**e
                ang += x.angle * e
        return Cyclo(mag, ang)
    out = q.one()
    for x, e in zip(q.values, a):
        if e:
            out = out * x**e
    return out


# -- matrices and rank data ----------------------------------------------------


def rank_exact(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank by fraction-free (Bareiss) elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    # clear denominators row by row so the elimination stays in the integers
    a = []
    for r in m:
        d = reduce(math.lcm, (x.denominator for x in r), 1)
        a.append([int(x * d) for x in r])
    nrows, ncols = len(a), len(a[0])
    rank, prev = 0, 1
    for c in range(ncols):
        piv = next((i for i in range(rank, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(rank + 1, nrows):
            a[i] = [(a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) // prev for j in range(ncols)]
        prev = a[rank][c]
        rank += 1
        if rank == nrows:
            break
    return rank


def rank_numeric(m: np.ndarray, rtol: float = 1e-8) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def _matmul_exact(a, b):
    return [[sum(x * y for x, y in zip(r, col)) for col in zip(*b)] for r in a]


def is_exact_matrix(m) -> bool:
    return not isinstance(m, np.ndarray) and all(isinstance(x, (int, Fraction)) for r in m for x in r)


def _arm_rank_data(mat, arm_values: Sequence[MValue], arm: int, rtol: float) -> list[int]:
    """Ranks of the partial products ``(A - x_1)...(A - x_j)`` for ``j = 1..w``."""
    exact = is_exact_matrix(mat) and all(isinstance(x, Cyclo) and x.is_rational() for x in arm_values)
    if exact:
        n = len(mat)
        cur = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        ranks = []
        for x in arm_values:
            lam = x.to_fraction()
            shifted = [[Fraction(mat[i][j]) - (lam if i == j else 0) for j in range(n)] for i in range(n)]
            cur = _matmul_exact(cur, shifted)
            ranks.append(rank_exact(cur))
        return ranks
    if any(isinstance(x, Sym) for x in arm_values):
        raise EncodingError("matrices cannot be checked against symbolic eigenvalues")
    a = np.asarray(mat, dtype=complex)
    n = a.shape[0]
    cur = np.eye(n, dtype=complex)
    ranks = []
    bound = 1.0
    for x in arm_values:
        factor = a - complex(x) * np.eye(n)
        cur = cur @ factor
        # threshold relative to the product of factor norms, which bounds |cur|
        bound *= np.linalg.norm(factor, 2)
        s = np.linalg.svd(cur, compute_uv=False)
        ranks.append(int(np.sum(s > rtol * bound)) if bound > 0 else 0)
    return ranks


def alpha_from_matrices(quiver: StarQuiver, matrices: Sequence, xi: XiTable, rtol: float = 1e-8) -> Vector:
    """Rank data ``alpha_C`` of a tuple of matrices.

    Exact (Bareiss) ranks are used when every matrix entry is an int or
    Fraction and the arm's eigenvalues are rational; otherwise singular values
    below ``rtol`` times the appropriate scale count as zero.
    """
    xi.check(quiver)
    if len(matrices) != len(xi.rows):
        raise ValueError(f"expected {len(xi.rows)} matrices, got {len(matrices)}")
    n = len(matrices[0])
    out = [n]
    for i, (mat, row) in enumerate(zip(matrices, xi.rows), start=1):
        if len(mat) != n or any(len(r) != n for r in mat):
            raise ValueError(f"matrix {i} is not {n}x{n}")
        ranks = _arm_rank_data(mat, row, i, rtol)
        if ranks[-1] != 0:
            raise AnnihilationError(i, f" (final product has rank {ranks[-1]})")
        out.extend(ranks[:-1])
    return tuple(out)


def jordan_blocks(xi_arm: Sequence[MValue], ranks: Sequence[int], n: int) -> list[tuple[MValue, int]]:
    """Jordan blocks ``(eigenvalue, size)`` realizing the rank sequence of one arm.

    ``ranks`` lists the ranks after ``j = 1 .. w-1`` factors.  With ``r_0 = n``
    and ``r_w = 0``, the drop ``r_{j-1} - r_j`` counts the blocks for
    eigenvalue ``x_j`` of size at least the number of occurrences of ``x_j``
    among ``x_1..x_j``.  Those counts must be non-increasing per eigenvalue,
    and then the blocks are determined uniquely.
    """
    w = len(xi_arm)
    if len(ranks) != w - 1:
        raise ValueError(f"expected {w - 1} ranks for an arm with {w} eigenvalues")
    r = [n, *ranks, 0]
    drops = [r[j - 1] - r[j] for j in range(1, w + 1)]
    if any(d < 0 for d in drops):
        raise NotRealizable(f"rank sequence {list(ranks)} is not weakly decreasing from {n}")
    seen: list[MValue] = []
    counts: dict[int, list[int]] = {}
    for x, d in zip(xi_arm, drops):
        key = next((t for t, y in enumerate(seen) if y == x), None)
        if key is None:
            key = len(seen)
            seen.append(x)
        counts.setdefault(key, []).append(d)
    blocks = []
    for key, seq in counts.items():
        if any(a < b for a, b in zip(seq, seq[1:])):
            raise NotRealizable(f"eigenvalue {seen[key]}: block counts {seq} increase")
        seq = seq + [0]
        for size in range(1, len(seq)):
            blocks.extend([(seen[key], size)] * (seq[size - 1] - seq[size]))
    return blocks


def realize_class(xi_arm: Sequence[MValue], ranks: Sequence[int], n: int, numeric: bool | None = None):
    """A block-diagonal matrix in the class described by one arm's data.

    Returns nested lists of Fractions when every eigenvalue is rational (and
    ``numeric`` is not set), otherwise a complex numpy array.
    """
    blocks = jordan_blocks(xi_arm, ranks, n)
    if numeric is None:
        numeric = not all(isinstance(x, Cyclo) and x.is_rational() for x in xi_arm)
    if numeric:
        if any(isinstance(x, Sym) for x in xi_arm):
            raise EncodingError("symbolic eigenvalues have no numeric value")
        out = np.zeros((n, n), dtype=complex)
    else:
        out = [[Fraction(0)] * n for _ in range(n)]
    pos = 0
    for x, size in blocks:
        val = complex(x) if numeric else x.to_fraction()
        for t in range(size):
            out[pos + t][pos + t] = val
            if t + 1 < size:
                out[pos + t][pos + t + 1] = 1
        pos += size
    return out


def arm_ranks(quiver: StarQuiver, a: Sequence[int], i: int) -> list[int]:
    return [a[v] for v in quiver.arm(i)]


@dataclass(frozen=True)
class ProblemInstance:
    """Weight sequence (as its quiver), eigenvalues, rank vector and optional matrices.

    Strictness of ``alpha`` is not enforced here so that a decision can report
    it; document parsing rejects non-strict vectors.
    """

    quiver: StarQuiver
    xi: XiTable
    alpha: Vector
    matrices: tuple | None = None

    def __post_init__(self) -> None:
        self.xi.check(self.quiver)
        object.__setattr__(self, "alpha", tuple(int(x) for x in self.alpha))
        self.quiver._check(self.alpha)

    @property
    def n(self) -> int:
        return self.alpha[0]
