"""Exact arithmetic: rationals, imaginary quadratic numbers, number-field residues,
dense matrices over Q(sqrt(-d)) and integer lattices in Hermite normal form.

Nothing in here touches floating point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Sequence, Union

import sympy

from motivix.errors import InvalidInput, RankError, ShapeError

logger = logging.getLogger(__name__)

Rat = Fraction
RatLike = Union[Fraction, int, str, Sequence[int]]


def as_rat(value: RatLike) -> Fraction:
    """Read an exact rational from an int, a Fraction, a "p/q" string or a [num, den] pair."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if not isinstance(num, int) or not isinstance(den, int):
            raise InvalidInput(f"rational pair must hold integers, got {value!r}")
        if den == 0:
            raise InvalidInput(f"zero denominator in {value!r}")
        return Fraction(num, den)
    raise InvalidInput(f"cannot read {value!r} as an exact rational")


@lru_cache(maxsize=None)
def is_squarefree(d: int) -> bool:
    if d < 1:
        return False
    return all(power == 1 for power in sympy.factorint(d).values())


# ---- Q(sqrt(-d)) ----


@dataclass(frozen=True)
class QuadInt:
    """The element a + b*sqrt(-d) of Q(sqrt(-d))."""

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", as_rat(self.a))
        object.__setattr__(self, "b", as_rat(self.b))
        if not is_squarefree(self.d):
            raise InvalidInput(f"d={self.d} is not a positive squarefree integer")

    @classmethod
    def of(cls, value: "QuadInt | RatLike", d: int) -> "QuadInt":
        if isinstance(value, QuadInt):
            if value.d != d:
                raise ShapeError(f"element of Q(sqrt(-{value.d})) used in Q(sqrt(-{d}))")
            return value
        return cls(as_rat(value), Fraction(0), d)

    @classmethod
    def sqrt_minus_d(cls, d: int) -> "QuadInt":
        return cls(Fraction(0), Fraction(1), d)

    def _coerce(self, other: object) -> "QuadInt":
        if isinstance(other, QuadInt):
            if other.d != self.d:
                raise ShapeError(f"cannot mix Q(sqrt(-{self.d})) and Q(sqrt(-{other.d}))")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadInt(Fraction(other), Fraction(0), self.d)
        return NotImplemented

    def __add__(self, other: object) -> "QuadInt":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a + other.a, self.b + other.b, self.d)

    __radd__ = __add__

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b, self.d)

    def __sub__(self, other: object) -> "QuadInt":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a - other.a, self.b - other.b, self.d)

    def __rsub__(self, other: object) -> "QuadInt":
        return -self + other

    def __mul__(self, other: object) -> "QuadInt":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(
            self.a * other.a - self.d * self.b * other.b,
            self.a * other.b + self.b * other.a,
            self.d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "QuadInt":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        norm = other.norm()
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(-d))")
        numerator = self * other.conj()
        return QuadInt(numerator.a / norm, numerator.b / norm, self.d)

    def conj(self) -> "QuadInt":
        return QuadInt(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a + self.d * self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        root = f"sqrt(-{self.d})"
        if self.a == 0:
            return f"{self.b}*{root}"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*{root}"

    def to_json(self) -> list:
        return [[self.a.numerator, self.a.denominator], [self.b.numerator, self.b.denominator]]


def realify(vector: Sequence[QuadInt]) -> tuple[Fraction, ...]:
    """Q(sqrt(-d))^g -> Q^(2g), interleaving (rational part, sqrt(-d) coefficient) per coordinate."""
    flat: list[Fraction] = []
    for entry in vector:
        flat.extend((entry.a, entry.b))
    return tuple(flat)


def derealify(values: Sequence[Fraction], d: int) -> tuple[QuadInt, ...]:
    if len(values) % 2:
        raise ShapeError("realified vector must have even length")
    return tuple(QuadInt(values[k], values[k + 1], d) for k in range(0, len(values), 2))


# ---- number fields Q[t]/(m) ----


@lru_cache(maxsize=None)
def is_irreducible(minpoly: tuple[int, ...]) -> bool:
    t = sympy.Symbol("t")
    return sympy.Poly(list(reversed(minpoly)), t, domain="QQ").is_irreducible


def _check_minpoly(minpoly: Sequence[int]) -> tuple[int, ...]:
    minpoly = tuple(int(c) for c in minpoly)
    if len(minpoly) < 2 or minpoly[-1] != 1:
        raise InvalidInput(f"minimal polynomial {minpoly} must be monic of degree >= 1")
    return minpoly


def nf_reduce(p: Sequence[RatLike], minpoly: Sequence[int]) -> "NfElem":
    """Remainder of p(t) (coefficients low to high) modulo the monic polynomial minpoly."""
    minpoly = _check_minpoly(minpoly)
    n = len(minpoly) - 1
    work = [as_rat(c) for c in p]
    for k in range(len(work) - 1, n - 1, -1):
        lead = work[k]
        if lead:
            for i in range(n):
                work[k - n + i] -= lead * minpoly[i]
            work[k] = Fraction(0)
    work = (work + [Fraction(0)] * n)[:n]
    return NfElem(minpoly, tuple(work))


@dataclass(frozen=True)
class NfElem:
    """A residue class in Q[t]/(minpoly); coefficients run from low to high degree."""

    minpoly: tuple[int, ...]
    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        minpoly = _check_minpoly(self.minpoly)
        object.__setattr__(self, "minpoly", minpoly)
        object.__setattr__(self, "coeffs", tuple(as_rat(c) for c in self.coeffs))
        if len(self.coeffs) != len(minpoly) - 1:
            raise ShapeError(f"expected {len(minpoly) - 1} coefficients, got {len(self.coeffs)}")
        if not is_irreducible(minpoly):
            logger.warning("Minimal polynomial %s is reducible; Q[t]/(m) is not a field", minpoly)

    @classmethod
    def constant(cls, value: RatLike, minpoly: Sequence[int]) -> "NfElem":
        return nf_reduce([value], minpoly)

    @classmethod
    def generator(cls, minpoly: Sequence[int]) -> "NfElem":
        return nf_reduce([0, 1], minpoly)

    def _same_field(self, other: "NfElem") -> None:
        if other.minpoly != self.minpoly:
            raise ShapeError("number-field elements over different minimal polynomials")

    def __add__(self, other: "NfElem") -> "NfElem":
        self._same_field(other)
        return NfElem(self.minpoly, tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "NfElem") -> "NfElem":
        self._same_field(other)
        return NfElem(self.minpoly, tuple(x - y for x, y in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "NfElem":
        return NfElem(self.minpoly, tuple(-x for x in self.coeffs))

    def __mul__(self, other: "NfElem") -> "NfElem":
        self._same_field(other)
        product = [Fraction(0)] * (2 * len(self.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    product[i + j] += x * y
        return nf_reduce(product, self.minpoly)

    def __pow__(self, exponent: int) -> "NfElem":
        if exponent < 0:
            raise InvalidInput("negative powers are not supported")
        result = NfElem.constant(1, self.minpoly)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self) -> str:
        terms = [f"{c}*t^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


# ---- dense matrices ----


@dataclass(frozen=True)
class ExactMatrix:
    rows: int
    cols: int
    entries: tuple[QuadInt, ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ShapeError("matrices must have positive dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise ShapeError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, got {len(self.entries)}"
            )
        fields = {entry.d for entry in self.entries}
        if len(fields) != 1:
            raise ShapeError(f"matrix mixes quadratic fields {sorted(fields)}")

    @property
    def d(self) -> int:
        return self.entries[0].d

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence["QuadInt | RatLike"]], d: int) -> "ExactMatrix":
        if not rows or any(len(row) != len(rows[0]) for row in rows):
            raise ShapeError("rows must be non-empty and of equal length")
        entries = tuple(QuadInt.of(value, d) for row in rows for value in row)
        return cls(len(rows), len(rows[0]), entries)

    @classmethod
    def zeros(cls, rows: int, cols: int, d: int) -> "ExactMatrix":
        zero = QuadInt(Fraction(0), Fraction(0), d)
        return cls(rows, cols, (zero,) * (rows * cols))

    @classmethod
    def identity(cls, n: int, d: int) -> "ExactMatrix":
        return cls.diagonal([1] * n, d)

    @classmethod
    def diagonal(cls, values: Sequence["QuadInt | RatLike"], d: int) -> "ExactMatrix":
        n = len(values)
        zero = QuadInt(Fraction(0), Fraction(0), d)
        entries = [zero] * (n * n)
        for i, value in enumerate(values):
            entries[i * n + i] = QuadInt.of(value, d)
        return cls(n, n, tuple(entries))

    @classmethod
    def elementary(cls, n: int, r: int, c: int, d: int, value: "QuadInt | RatLike" = 1) -> "ExactMatrix":
        """value * E_rc."""
        zero = QuadInt(Fraction(0), Fraction(0), d)
        entries = [zero] * (n * n)
        entries[r * n + c] = QuadInt.of(value, d)
        return cls(n, n, tuple(entries))

    def __getitem__(self, index: tuple[int, int]) -> QuadInt:
        i, j = index
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[QuadInt]]:
        return [list(self.entries[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def _check_same_shape(self, other: "ExactMatrix") -> None:
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(self.rows, self.cols, tuple(x + y for x, y in zip(self.entries, other.entries)))

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(self.rows, self.cols, tuple(x - y for x, y in zip(self.entries, other.entries)))

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, tuple(-x for x in self.entries))

    def scale(self, factor: "QuadInt | RatLike") -> "ExactMatrix":
        factor = QuadInt.of(factor, self.d)
        return ExactMatrix(self.rows, self.cols, tuple(factor * x for x in self.entries))

    def __rmul__(self, factor: "QuadInt | int | Fraction") -> "ExactMatrix":
        if isinstance(factor, (QuadInt, int, Fraction)):
            return self.scale(factor)
        return NotImplemented

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot compose {self.shape} with {other.shape}")
        zero = QuadInt(Fraction(0), Fraction(0), self.d)
        out: list[QuadInt] = []
        for i in range(self.rows):
            row = self.entries[i * self.cols:(i + 1) * self.cols]
            for j in range(other.cols):
                acc = zero
                for k, left in enumerate(row):
                    if left.is_zero():
                        continue
                    right = other.entries[k * other.cols + j]
                    if not right.is_zero():
                        acc = acc + left * right
                out.append(acc)
        return ExactMatrix(self.rows, other.cols, tuple(out))

    def __pow__(self, exponent: int) -> "ExactMatrix":
        if self.rows != self.cols or exponent < 0:
            raise ShapeError("only non-negative powers of square matrices")
        result = ExactMatrix.identity(self.rows, self.d)
        for _ in range(exponent):
            result = result @ self
        return result

    def apply(self, vector: Sequence[QuadInt]) -> tuple[QuadInt, ...]:
        if len(vector) != self.cols:
            raise ShapeError(f"vector of length {len(vector)} for a {self.shape} matrix")
        zero = QuadInt(Fraction(0), Fraction(0), self.d)
        out = []
        for i in range(self.rows):
            acc = zero
            for j in range(self.cols):
                entry = self.entries[i * self.cols + j]
                if not entry.is_zero() and not vector[j].is_zero():
                    acc = acc + entry * vector[j]
            out.append(acc)
        return tuple(out)

    def conj(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, tuple(x.conj() for x in self.entries))

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            self.cols,
            self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    def hadamard(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(self.rows, self.cols, tuple(x * y for x, y in zip(self.entries, other.entries)))

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.entries)

    def is_diagonal(self) -> bool:
        return all(
            self.entries[i * self.cols + j].is_zero()
            for i in range(self.rows)
            for j in range(self.cols)
            if i != j
        )

    def diagonal_entries(self) -> tuple[QuadInt, ...]:
        return tuple(self.entries[i * self.cols + i] for i in range(min(self.rows, self.cols)))

    def nonzero_cells(self) -> list[tuple[int, int, QuadInt]]:
        return [
            (i, j, self.entries[i * self.cols + j])
            for i in range(self.rows)
            for j in range(self.cols)
            if not self.entries[i * self.cols + j].is_zero()
        ]

    def __str__(self) -> str:
        return "[" + "; ".join(", ".join(str(x) for x in row) for row in self.to_rows()) + "]"

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "entries": [x.to_json() for x in self.entries]}


# ---- integer lattices ----


@dataclass(frozen=True)
class ZLattice:
    """A full-rank lattice in Q^n given by generating rows."""

    ambient_rank: int
    basis: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(as_rat(x) for x in row) for row in self.basis)
        if any(len(row) != self.ambient_rank for row in rows):
            raise ShapeError(f"lattice rows must have length {self.ambient_rank}")
        object.__setattr__(self, "basis", rows)

    @classmethod
    def standard(cls, rank: int) -> "ZLattice":
        return cls(rank, tuple(tuple(Fraction(int(i == j)) for j in range(rank)) for i in range(rank)))

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence[RatLike]], ambient_rank: int) -> "ZLattice":
        """Z-span of an arbitrary finite generating set, canonicalized."""
        return hnf(cls(ambient_rank, tuple(tuple(row) for row in generators)))


def _integer_hnf(rows: list[list[int]], ncols: int) -> list[list[int]]:
    rows = [list(row) for row in rows if any(row)]
    pivot = 0
    for col in range(ncols):
        if pivot == len(rows):
            break
        # Euclid on the column until one row keeps a nonzero entry
        while True:
            active = [k for k in range(pivot, len(rows)) if rows[k][col]]
            if not active:
                break
            best = min(active, key=lambda k: abs(rows[k][col]))
            rows[pivot], rows[best] = rows[best], rows[pivot]
            cleared = True
            for k in range(pivot + 1, len(rows)):
                if rows[k][col]:
                    q = rows[k][col] // rows[pivot][col]
                    rows[k] = [a - q * b for a, b in zip(rows[k], rows[pivot])]
                    if rows[k][col]:
                        cleared = False
            if cleared:
                break
        if not rows[pivot][col]:
            continue
        if rows[pivot][col] < 0:
            rows[pivot] = [-a for a in rows[pivot]]
        for k in range(pivot):
            q = rows[k][col] // rows[pivot][col]
            if q:
                rows[k] = [a - q * b for a, b in zip(rows[k], rows[pivot])]
        pivot += 1
    return rows[:pivot]


@lru_cache(maxsize=1024)
def _hnf_cached(rank: int, basis: tuple[tuple[Fraction, ...], ...]) -> ZLattice:
    scale = lcm(*(x.denominator for row in basis for x in row))
    integer_rows = [[int(x * scale) for x in row] for row in basis]
    reduced = _integer_hnf(integer_rows, rank)
    if len(reduced) != rank:
        raise RankError(f"generators span a rank-{len(reduced)} lattice in Q^{rank}")
    return ZLattice(rank, tuple(tuple(Fraction(a, scale) for a in row) for row in reduced))


def hnf(lattice: ZLattice) -> ZLattice:
    """Canonical Hermite normal form: upper triangular rows, positive pivots,
    entries above a pivot reduced into [0, pivot)."""
    return _hnf_cached(lattice.ambient_rank, lattice.basis)


def lattice_coordinates(lattice: ZLattice, vector: Sequence[RatLike]) -> tuple[Fraction, ...]:
    if len(vector) != lattice.ambient_rank:
        raise ShapeError(f"vector of length {len(vector)} in a rank-{lattice.ambient_rank} lattice")
    basis = hnf(lattice).basis
    residual = [as_rat(x) for x in vector]
    coords = []
    for i, row in enumerate(basis):
        c = residual[i] / row[i]
        coords.append(c)
        if c:
            for k in range(i, lattice.ambient_rank):
                residual[k] -= c * row[k]
    return tuple(coords)


def lattice_contains(lattice: ZLattice, vector: Sequence[RatLike]) -> bool:
    return all(c.denominator == 1 for c in lattice_coordinates(lattice, vector))


def lattice_determinant(lattice: ZLattice) -> Fraction:
    det = Fraction(1)
    for i, row in enumerate(hnf(lattice).basis):
        det *= row[i]
    return det


def order_modulo(lattice: ZLattice, vector: Sequence[RatLike]) -> int:
    """Order of the class of vector in Q^n / lattice."""
    return lcm(*(c.denominator for c in lattice_coordinates(lattice, vector)))
