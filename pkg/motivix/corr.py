"""Codimension-2 correspondences on (C x C)^2 modulo balanced cycles.

A class is a finite sum of tensors a (x) b with a, b in End_Q(J), living in one of
three grid blocks: THETA (the transcendental grid Theta_ij) and A1, A2 (the two
algebraic grids built from divisors on E x E). Blocks are mutually orthogonal under
composition and each carries the weight with which the convolution sees it.

Terms are stored in the Q-basis omega^p * E_rc of End_Q(J) (omega = sqrt(-d)), so
the representation is canonical and equality is structural.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Sequence

from motivix.cmlat import AbelianModel, Cell, EndoQ, idempotent, rosati_polarized
from motivix.errors import InvalidInput, MotivixError, ShapeError
from motivix.exact import ExactMatrix, QuadInt

if TYPE_CHECKING:
    from motivix.decomp import Candidate

logger = logging.getLogger(__name__)


class Block(str, Enum):
    THETA = "theta"
    A1 = "a1"
    A2 = "a2"


BLOCK_WEIGHTS = {
    Block.THETA: Fraction(2),
    Block.A1: Fraction(-1, 2),
    Block.A2: Fraction(-1, 2),
}

# (block, r1, c1, p1, r2, c2, p2) for omega^p1 E_{r1 c1} (x) omega^p2 E_{r2 c2}
TermKey = tuple[Block, int, int, int, int, int, int]


def _omega_product(p: int, q: int, d: int) -> tuple[int, int]:
    """omega^p * omega^q = factor * omega^r with omega^2 = -d."""
    total = p + q
    if total >= 2:
        return total - 2, -d
    return total, 1


def _expand(matrix: EndoQ) -> list[tuple[int, int, int, Fraction]]:
    out = []
    for r, c, entry in matrix.nonzero_cells():
        if entry.a:
            out.append((r, c, 0, entry.a))
        if entry.b:
            out.append((r, c, 1, entry.b))
    return out


@dataclass(frozen=True)
class Corr2:
    g: int
    d: int
    polarization: tuple[int, ...]
    terms: tuple[tuple[TermKey, Fraction], ...]

    @classmethod
    def _collect(cls, g: int, d: int, polarization: tuple[int, ...], acc: dict) -> "Corr2":
        return cls(g, d, polarization, tuple(sorted((k, v) for k, v in acc.items() if v)))

    @classmethod
    def zero(cls, m: AbelianModel) -> "Corr2":
        return cls(m.g, m.d, m.atom_exponents, ())

    @classmethod
    def tensor(
        cls, m: AbelianModel, block: Block, left: EndoQ, right: EndoQ, coeff: Fraction | int = 1
    ) -> "Corr2":
        if left.shape != (m.g, m.g) or right.shape != (m.g, m.g):
            raise ShapeError(f"tensor factors must be {m.g}x{m.g}")
        acc: dict[TermKey, Fraction] = defaultdict(Fraction)
        for r1, c1, p1, a in _expand(left):
            for r2, c2, p2, b in _expand(right):
                acc[(Block(block), r1, c1, p1, r2, c2, p2)] += Fraction(coeff) * a * b
        return cls._collect(m.g, m.d, m.atom_exponents, acc)

    def _check(self, other: "Corr2") -> None:
        if (self.g, self.d, self.polarization) != (other.g, other.d, other.polarization):
            raise ShapeError(
                f"correspondences on different models (g={self.g}, d={self.d}) vs (g={other.g}, d={other.d})"
            )

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Corr2") -> "Corr2":
        self._check(other)
        acc: dict[TermKey, Fraction] = defaultdict(Fraction)
        for key, value in self.terms + other.terms:
            acc[key] += value
        return Corr2._collect(self.g, self.d, self.polarization, acc)

    def scale(self, factor: Fraction | int) -> "Corr2":
        factor = Fraction(factor)
        return Corr2._collect(self.g, self.d, self.polarization, {k: v * factor for k, v in self.terms})

    def __neg__(self) -> "Corr2":
        return self.scale(-1)

    def __sub__(self, other: "Corr2") -> "Corr2":
        return self + (-other)

    def restrict(self, block: Block) -> "Corr2":
        return Corr2(self.g, self.d, self.polarization, tuple(t for t in self.terms if t[0][0] is block))

    def blocks(self) -> set[Block]:
        return {key[0] for key, _ in self.terms}

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "d": self.d,
            "terms": [
                {
                    "block": key[0].value,
                    "left": [key[1] + 1, key[2] + 1, key[3]],
                    "right": [key[4] + 1, key[5] + 1, key[6]],
                    "coeff": [value.numerator, value.denominator],
                }
                for key, value in self.terms
            ],
        }


def compose(x: Corr2, y: Corr2) -> Corr2:
    """(a (x) b) o (c (x) d) = (a c) (x) (b d), zero across blocks."""
    x._check(y)
    index: dict[tuple[Block, int, int], list] = defaultdict(list)
    for (block, r1, c1, p1, r2, c2, p2), value in y.terms:
        index[(block, r1, r2)].append((c1, p1, c2, p2, value))
    acc: dict[TermKey, Fraction] = defaultdict(Fraction)
    for (block, r1, c1, p1, r2, c2, p2), a in x.terms:
        for c1b, p1b, c2b, p2b, b in index.get((block, c1, c2), ()):
            q1, f1 = _omega_product(p1, p1b, x.d)
            q2, f2 = _omega_product(p2, p2b, x.d)
            acc[(block, r1, c1b, q1, r2, c2b, q2)] += a * b * f1 * f2
    return Corr2._collect(x.g, x.d, x.polarization, acc)


def transpose(x: Corr2) -> Corr2:
    """(a (x) b)^T = rosati(a) (x) rosati(b); rosati(omega^p E_rc) = (-1)^p (n_r/n_c) omega^p E_cr."""
    n = x.polarization
    acc: dict[TermKey, Fraction] = defaultdict(Fraction)
    for (block, r1, c1, p1, r2, c2, p2), value in x.terms:
        sign = -1 if (p1 + p2) % 2 else 1
        acc[(block, c1, r1, p1, c2, r2, p2)] += value * sign * Fraction(n[r1], n[c1]) * Fraction(n[r2], n[c2])
    return Corr2._collect(x.g, x.d, x.polarization, acc)


def essential(x: Corr2) -> Corr2:
    """The c0 part: everything outside THETA is balanced or numerically trivial."""
    return x.restrict(Block.THETA)


def bullet(x: Corr2, y: Corr2) -> Corr2:
    """Composition of the essential (THETA) parts.

    Two-sided unit: `unit(m)`, the THETA unit. The result never has A1 or A2 terms.
    """
    return compose(essential(x), essential(y))


def unit(m: AbelianModel) -> Corr2:
    """id (x) id in THETA: the unit of `bullet` on the essential part, not of `compose`."""
    return Corr2.tensor(m, Block.THETA, m.identity(), m.identity())


def diagonal(m: AbelianModel) -> Corr2:
    """Delta (x) Delta restricted to the grid blocks."""
    total = Corr2.zero(m)
    for block in Block:
        total = total + Corr2.tensor(m, block, m.identity(), m.identity())
    return total


def b_summand(m: AbelianModel, s: int, t: int) -> Corr2:
    """B^{s,t} = pi^s(C) (x) pi^t(C) for (s, t) != (1, 1); balanced, hence zero here."""
    if (s, t) == (1, 1) or not (0 <= s <= 2 and 0 <= t <= 2):
        raise InvalidInput(f"B-summands are indexed by K^2 minus (1,1), got {(s, t)}")
    return Corr2.zero(m)


def conv(sigma: EndoQ, x: Corr2) -> EndoQ:
    """conv_Sigma(a (x) b) = weight * b o rosati(Sigma) o a, extended linearly."""
    if sigma.shape != (x.g, x.g):
        raise ShapeError(f"expected a {x.g}x{x.g} endomorphism, got {sigma.shape}")
    transposed = rosati_polarized(sigma, x.polarization)
    omega = QuadInt.sqrt_minus_d(x.d)
    acc: dict[tuple[int, int], QuadInt] = {}
    for (block, r1, c1, p1, r2, c2, p2), value in x.terms:
        middle = transposed[c2, r1]
        if middle.is_zero():
            continue
        q, factor = _omega_product(p1, p2, x.d)
        scalar = BLOCK_WEIGHTS[block] * value * factor
        contribution = middle * (omega if q else 1) * scalar
        acc[(r2, c1)] = acc[(r2, c1)] + contribution if (r2, c1) in acc else contribution
    result = ExactMatrix.zeros(x.g, x.g, x.d)
    if not acc:
        return result
    entries = list(result.entries)
    for (r, c), value in acc.items():
        entries[r * x.g + c] = value
    return ExactMatrix(x.g, x.g, tuple(entries))


# ---- projector grids ----


@dataclass(frozen=True)
class GridProjectors:
    theta: tuple[tuple[Corr2, ...], ...]
    a1: tuple[tuple[Corr2, ...], ...]
    a2: tuple[tuple[Corr2, ...], ...]
    model: AbelianModel

    def grid(self, block: Block) -> tuple[tuple[Corr2, ...], ...]:
        return {Block.THETA: self.theta, Block.A1: self.a1, Block.A2: self.a2}[block]

    def total(self, block: Block, cells: Iterable[Cell]) -> Corr2:
        table = self.grid(block)
        total = Corr2.zero(self.model)
        for i, j in sorted(cells):
            total = total + table[i][j]
        return total

    def a_grid(self, i: int, j: int) -> Corr2:
        return self.a1[i][j] + self.a2[i][j]

    def lambda_class(self, candidate: "Candidate") -> Corr2:
        """A1 on U_Lambda + A2 on V_Lambda + THETA on W_Lambda."""
        candidate.validate(self.model.g)
        return (
            self.total(Block.A1, candidate.u_lambda)
            + self.total(Block.A2, candidate.v_lambda)
            + self.total(Block.THETA, candidate.w_lambda)
        )

    def xi_class(self, candidate: "Candidate") -> Corr2:
        return self.lambda_class(candidate.swap())


def build_grids(m: AbelianModel) -> GridProjectors:
    atoms = [idempotent(m, {i}) for i in m.indices]

    def table(block: Block) -> tuple[tuple[Corr2, ...], ...]:
        return tuple(tuple(Corr2.tensor(m, block, atoms[i], atoms[j]) for j in m.indices) for i in m.indices)

    grids = GridProjectors(table(Block.THETA), table(Block.A1), table(Block.A2), m)
    cells = [(i, j) for i in m.indices for j in m.indices]
    if grids.total(Block.THETA, cells) != unit(m):
        raise MotivixError("theta grid does not sum to the unit; model polarization is inconsistent")
    return grids


def conv_delta_of_candidate(c: "Candidate", m: AbelianModel) -> EndoQ:
    """conv_Delta(Lambda) = -1/2 e_{I_U} - 1/2 e_{I_V} + 2 e_{I_W}, read off the diagonal cells."""
    c.validate(m.g)
    return conv(m.identity(), build_grids(m).lambda_class(c))


def conv_table(grids: GridProjectors, probes: Sequence[tuple[str, EndoQ]]) -> list[dict]:
    """conv values of every grid cell under every probe; zero cells are kept as empty lists."""
    m = grids.model
    rows = []
    for label, sigma in probes:
        for block in Block:
            for i in m.indices:
                for j in m.indices:
                    image = conv(sigma, grids.grid(block)[i][j])
                    rows.append(
                        {
                            "probe": label,
                            "grid": block.value,
                            "cell": [i + 1, j + 1],
                            "value": [
                                {"row": r + 1, "col": c + 1, "entry": entry.to_json()}
                                for r, c, entry in image.nonzero_cells()
                            ],
                        }
                    )
    logger.debug("conv table with %d rows for %d probes", len(rows), len(probes))
    return rows
