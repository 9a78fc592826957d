"""Lattice model of a CM abelian variety J isogenous to E^g.

J is described by a lattice Lambda in Q(sqrt(-d))^g containing O^g. An element of
End_Q(J) is a g x g matrix over Q(sqrt(-d)); it is integral when it maps Lambda into
itself. In AXIOMATIC mode no lattice is known and only the exponents of the atoms are
given; integrality is then decided from those exponents where that is possible.

Matrix conventions: gamma_b^T gamma_a is n_a * E_ba, so e_i = E_ii, and the Rosati
involution is M -> D^-1 conj(M)^T D with D = diag(n_1, ..., n_g).
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import lcm
from pathlib import Path
from typing import Any, Iterable, Sequence

import sympy
from sympy.combinatorics import Permutation
from pydantic import BaseModel, Field, ValidationError

from motivix.errors import (
    HypothesisError,
    InvalidInput,
    LatticeError,
    ShapeError,
    UnsupportedQuery,
)
from motivix.exact import (
    ExactMatrix,
    QuadInt,
    ZLattice,
    as_rat,
    derealify,
    is_squarefree,
    lattice_contains,
    lattice_coordinates,
    order_modulo,
    realify,
)

logger = logging.getLogger(__name__)

EndoQ = ExactMatrix

HYPOTHESIS_BOUND = 4


class Mode(str, Enum):
    LATTICE = "lattice"
    AXIOMATIC = "axiomatic"


class LiverpoolOutcome(str, Enum):
    CONSISTENT = "CONSISTENT"
    VIOLATES = "VIOLATES"


Cell = tuple[int, int]


def full_grid(g: int) -> frozenset[Cell]:
    return frozenset((i, j) for i in range(g) for j in range(g))


def diagonal_cells(g: int) -> frozenset[Cell]:
    return frozenset((i, i) for i in range(g))


# ---- permutations ----


def check_permutation(sigma: Sequence[int], g: int) -> tuple[int, ...]:
    sigma = tuple(int(x) for x in sigma)
    if len(sigma) != g or sorted(sigma) != list(range(g)):
        raise InvalidInput(f"{sigma} is not a permutation of {g} indices")
    return sigma


def identity_permutation(g: int) -> tuple[int, ...]:
    return tuple(range(g))


def transposition(g: int, i: int, j: int) -> tuple[int, ...]:
    sigma = list(range(g))
    sigma[i], sigma[j] = j, i
    return tuple(sigma)


def inverse_permutation(sigma: Sequence[int]) -> tuple[int, ...]:
    return tuple((~Permutation(list(sigma))).array_form)


def format_permutation(sigma: Sequence[int]) -> str:
    """Cycle notation with 1-based indices, "id" for the identity."""
    cycles = Permutation(list(sigma)).cyclic_form
    return "".join("(" + " ".join(str(k + 1) for k in cycle) + ")" for cycle in cycles) or "id"


@dataclass(frozen=True)
class PermEndoSpec:
    sigma: tuple[int, ...]
    U: frozenset[Cell] | None = None
    exponents: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma", check_permutation(self.sigma, len(self.sigma)))
        if self.U is not None:
            object.__setattr__(self, "U", frozenset(self.U))


# ---- the model ----


@dataclass(frozen=True, eq=False)
class AbelianModel:
    d: int
    g: int
    glue: tuple[tuple[QuadInt, ...], ...]
    mode: Mode
    lattice: ZLattice | None
    atom_exponents: tuple[int, ...]
    maximal_order: bool = False
    name: str = ""
    _exponents: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def indices(self) -> range:
        return range(self.g)

    @cached_property
    def generators(self) -> tuple[tuple[QuadInt, ...], ...]:
        """Lattice basis rows read back as vectors in Q(sqrt(-d))^g."""
        if self.lattice is None:
            raise UnsupportedQuery("axiomatic models carry no lattice")
        return tuple(derealify(row, self.d) for row in self.lattice.basis)

    def identity(self) -> EndoQ:
        return ExactMatrix.identity(self.g, self.d)

    def zero(self) -> EndoQ:
        return ExactMatrix.zeros(self.g, self.g, self.d)

    def summary(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "name": self.name,
            "d": self.d,
            "g": self.g,
            "mode": self.mode.value,
            "atom_exponents": list(self.atom_exponents),
            "maximal_order": self.maximal_order,
        }
        if self.lattice is not None:
            payload["glue"] = [[entry.to_json() for entry in vector] for vector in self.glue]
            payload["lattice"] = [[[x.numerator, x.denominator] for x in row] for row in self.lattice.basis]
        return payload

    to_json = summary


def idempotent(m: AbelianModel, K: Iterable[int]) -> EndoQ:
    """e_K, the diagonal projector onto the factors indexed by K."""
    K = _check_subset(m, K)
    return ExactMatrix.diagonal([int(i in K) for i in m.indices], m.d)


def _check_subset(m: AbelianModel, K: Iterable[int]) -> frozenset[int]:
    K = frozenset(K)
    if not K <= set(m.indices):
        raise InvalidInput(f"subset {sorted(i + 1 for i in K)} is not inside I = {{1..{m.g}}}")
    return K


# ---- building ----


def _read_glue_entry(raw: Any, d: int) -> QuadInt:
    try:
        if isinstance(raw, QuadInt):
            return QuadInt.of(raw, d)
        if isinstance(raw, (list, tuple)) and len(raw) == 2 and all(isinstance(x, (list, tuple)) for x in raw):
            return QuadInt(as_rat(raw[0]), as_rat(raw[1]), d)
        return QuadInt(as_rat(raw), Fraction(0), d)
    except (InvalidInput, ZeroDivisionError, ValueError, TypeError) as exc:
        raise LatticeError(f"glue entry {raw!r} is not an exact element of Q(sqrt(-{d}))") from exc


def _order_generator(d: int, maximal_order: bool) -> QuadInt:
    if maximal_order and d % 4 == 3:
        return QuadInt(Fraction(1, 2), Fraction(1, 2), d)
    return QuadInt.sqrt_minus_d(d)


def _closure(d: int, g: int, glue: Sequence[Sequence[QuadInt]], maximal_order: bool) -> ZLattice:
    omega = _order_generator(d, maximal_order)
    one = QuadInt(Fraction(1), Fraction(0), d)
    zero = QuadInt(Fraction(0), Fraction(0), d)
    generators = []
    for k in range(g):
        for unit in (one, omega):
            vector = [zero] * g
            vector[k] = unit
            generators.append(realify(vector))
    for vector in glue:
        generators.append(realify(vector))
        generators.append(realify([omega * x for x in vector]))
    return ZLattice.from_generators(generators, 2 * g)


def _lattice_exponent(lattice: ZLattice, generators: Sequence[Sequence[QuadInt]], K: frozenset[int]) -> int:
    """n_K as the lcm of the orders of e_K*w modulo Lambda over the generators w."""
    result = 1
    for w in generators:
        zero = QuadInt(Fraction(0), Fraction(0), w[0].d)
        projected = [x if k in K else zero for k, x in enumerate(w)]
        result = lcm(result, order_modulo(lattice, realify(projected)))
    return result


def build_model(
    d: int,
    g: int,
    glue: Sequence[Sequence[Any]] = (),
    mode: Mode | str = Mode.LATTICE,
    exponents: Sequence[int] | None = None,
    maximal_order: bool = False,
    name: str = "",
) -> AbelianModel:
    if not is_squarefree(d):
        raise InvalidInput(f"d={d} must be a positive squarefree integer")
    if g < 1:
        raise InvalidInput("g must be positive")
    mode = Mode(mode)
    vectors = []
    for raw in glue:
        if len(raw) != g:
            raise ShapeError(f"glue vector of length {len(raw)} for g={g}")
        vectors.append(tuple(_read_glue_entry(x, d) for x in raw))

    if mode is Mode.AXIOMATIC:
        if exponents is None or len(exponents) != g:
            raise InvalidInput(f"axiomatic models need {g} atom exponents")
        if any(not isinstance(n, int) or n < 1 for n in exponents):
            raise InvalidInput(f"atom exponents must be positive integers, got {list(exponents)}")
        if g == 2 and exponents[0] != exponents[1]:
            # e_1 = id - e_2, so both atoms share one exponent
            raise InvalidInput(f"for g = 2 both atom exponents must agree, got {list(exponents)}")
        model = AbelianModel(d, g, tuple(vectors), mode, None, tuple(exponents), maximal_order, name)
        logger.info("Built axiomatic model %s: g=%d, exponents=%s", name or "<anonymous>", g, list(exponents))
        return model

    lattice = _closure(d, g, vectors, maximal_order)
    generators = [derealify(row, d) for row in lattice.basis]
    atoms = tuple(_lattice_exponent(lattice, generators, frozenset({i})) for i in range(g))
    model = AbelianModel(d, g, tuple(vectors), mode, lattice, atoms, maximal_order, name)
    if not is_integral(model, model.identity()):
        raise LatticeError("identity is not integral; lattice closure failed")
    logger.info("Built lattice model %s: d=%d, g=%d, atom exponents=%s", name or "<anonymous>", d, g, list(atoms))
    return model


class ModelFile(BaseModel):
    """On-disk model description; rationals are [num, den] pairs."""

    name: str = ""
    d: int
    g: int
    glue: list[list[Any]] = Field(default_factory=list)
    mode: Mode = Mode.LATTICE
    exponents: list[int] | None = None
    maximal_order: bool = False
    metadata: dict[str, Any] = Field(default_factory=dict)


def model_from_file_data(data: ModelFile) -> AbelianModel:
    return build_model(
        data.d,
        data.g,
        data.glue,
        data.mode,
        data.exponents,
        data.maximal_order,
        data.name,
    )


def read_model_file(path: str | Path) -> ModelFile:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return ModelFile.model_validate(raw)
    except OSError as exc:
        raise InvalidInput(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"model file {path} is not valid JSON: {exc}") from exc
    except ValidationError as exc:
        raise InvalidInput(f"model file {path} does not match the schema: {exc}") from exc


def load_model(path: str | Path) -> AbelianModel:
    return model_from_file_data(read_model_file(path))


# ---- integrality ----


def is_integral(m: AbelianModel, x: EndoQ) -> bool:
    if x.shape != (m.g, m.g):
        raise ShapeError(f"expected a {m.g}x{m.g} endomorphism, got {x.shape}")
    if x.d != m.d:
        raise ShapeError(f"endomorphism over Q(sqrt(-{x.d})) on a model over Q(sqrt(-{m.d}))")
    if m.mode is Mode.LATTICE:
        return all(lattice_contains(m.lattice, realify(x.apply(w))) for w in m.generators)
    return _axiomatic_integral(m, x)


def _axiomatic_integral(m: AbelianModel, x: EndoQ) -> bool:
    if not x.is_diagonal():
        raise UnsupportedQuery("axiomatic integrality is only defined on the span of the e_K")
    diagonal = x.diagonal_entries()
    if not all(entry.is_rational() for entry in diagonal):
        raise UnsupportedQuery("axiomatic integrality needs rational coefficients on the e_K")
    coefficients = [entry.a for entry in diagonal]
    # e0_i * x = c_i * e0_i, and an integral multiple of a norm-endomorphism has integer factor
    if any(c.denominator != 1 for c in coefficients):
        return False
    return integer_pattern_integral(m, [int(c) for c in coefficients])


def integer_pattern_integral(m: AbelianModel, coefficients: Sequence[int]) -> bool:
    """Decide sum_i c_i e_i for integer c_i from the atom exponents.

    Integer multiples of id may be subtracted freely. One remaining class K with
    coefficient q is integral iff n_K | q; several classes are integral when each
    term is. Anything else raises UnsupportedQuery.
    """
    classes: dict[int, set[int]] = {}
    for i, c in enumerate(coefficients):
        classes.setdefault(c, set()).add(i)
    if len(classes) <= 1:
        return True
    for base in sorted(classes):
        rest = [(value - base, frozenset(K)) for value, K in classes.items() if value != base]
        try:
            divisible = [q % exponent(m, K) == 0 for q, K in rest]
        except UnsupportedQuery:
            continue
        if len(rest) == 1:
            return divisible[0]
        if all(divisible):
            return True
    raise UnsupportedQuery(f"coefficient pattern {list(coefficients)} is outside the derivable span")


# ---- exponents ----


def _axiomatic_exponent(m: AbelianModel, K: frozenset[int]) -> int:
    if len(K) == 1:
        return m.atom_exponents[next(iter(K))]
    if len(K) == m.g - 1:
        (missing,) = set(m.indices) - K
        return m.atom_exponents[missing]
    raise UnsupportedQuery(f"exponent of K={sorted(i + 1 for i in K)} is not derivable from atom exponents")


def exponent(m: AbelianModel, K: Iterable[int]) -> int:
    K = _check_subset(m, K)
    if not K or len(K) == m.g:
        return 1
    with m._lock:
        cached = m._exponents.get(K)
    if cached is not None:
        return cached
    if m.mode is Mode.LATTICE:
        value = _lattice_exponent(m.lattice, m.generators, K)
    else:
        value = _axiomatic_exponent(m, K)
    with m._lock:
        return m._exponents.setdefault(K, value)


def scan_ceiling(m: AbelianModel) -> int:
    """(lcm of generator denominators)^2, a bound for every n_K."""
    if m.lattice is None:
        raise UnsupportedQuery("scan ceiling needs a lattice")
    denominators = [x.denominator for row in m.lattice.basis for x in row]
    return lcm(*denominators) ** 2


def exponent_by_scan(m: AbelianModel, K: Iterable[int], bound: int | None = None) -> int:
    """min{ k >= 1 : k*e_K integral }, by scanning k upward."""
    projector = idempotent(m, K)
    bound = bound or scan_ceiling(m)
    for k in range(1, bound + 1):
        if is_integral(m, projector.scale(k)):
            return k
    raise LatticeError(f"no multiple of e_K up to {bound} is integral")


def norm_endomorphism(m: AbelianModel, K: Iterable[int]) -> EndoQ:
    """e0_K = n_K * e_K."""
    return idempotent(m, K).scale(exponent(m, K))


def proper_subsets(g: int) -> Iterable[frozenset[int]]:
    for size in range(1, g):
        for K in combinations(range(g), size):
            yield frozenset(K)


def subset_exponent_floor(m: AbelianModel) -> int | None:
    """Smallest n_K over proper nonempty K; None for g = 1.

    In AXIOMATIC mode only atoms are known and their minimum is taken as the bound,
    which is the hypothesis the indecomposability argument assumes.
    """
    if m.g == 1:
        return None
    if m.mode is Mode.AXIOMATIC:
        return min(m.atom_exponents)
    return min(exponent(m, K) for K in proper_subsets(m.g))


def require_hypothesis(m: AbelianModel, bound: int = HYPOTHESIS_BOUND) -> int | None:
    floor = subset_exponent_floor(m)
    if floor is not None and floor < bound:
        offenders = [i + 1 for i, n in enumerate(m.atom_exponents) if n < bound]
        raise HypothesisError(
            f"some proper abelian subvariety has exponent {floor} < {bound}"
            + (f" (atoms {offenders})" if offenders else "")
        )
    return floor


# ---- permutation endomorphisms and transposition ----


def perm_endo(m: AbelianModel, spec: PermEndoSpec) -> EndoQ:
    """sigma_U = sum over i with (i, sigma(i)) in U of (n_sigma(i) / n_i) E_{i,sigma(i)}."""
    sigma = check_permutation(spec.sigma, m.g)
    exps = spec.exponents or m.atom_exponents
    if len(exps) != m.g:
        raise ShapeError(f"{len(exps)} exponents for g={m.g}")
    cells = full_grid(m.g) if spec.U is None else spec.U
    zero = QuadInt(Fraction(0), Fraction(0), m.d)
    entries = [zero] * (m.g * m.g)
    for i, j in enumerate(sigma):
        if (i, j) in cells:
            entries[i * m.g + j] = QuadInt(Fraction(exps[j], exps[i]), Fraction(0), m.d)
    return ExactMatrix(m.g, m.g, tuple(entries))


def rosati_polarized(x: EndoQ, polarization: Sequence[int]) -> EndoQ:
    """D^-1 conj(x)^T D with D = diag(polarization)."""
    g, n = len(polarization), polarization
    if x.shape != (g, g):
        raise ShapeError(f"expected a {g}x{g} endomorphism, got {x.shape}")
    return ExactMatrix(
        g,
        g,
        tuple(x[j, i].conj() * Fraction(n[j], n[i]) for i in range(g) for j in range(g)),
    )


def rosati(x: EndoQ, m: AbelianModel) -> EndoQ:
    return rosati_polarized(x, m.atom_exponents)


def twisted_support(sigma: Sequence[int], U: Iterable[Cell]) -> frozenset[int]:
    """K' = {i : (sigma^-1(i), i) in U}, the support of e_{sigma,U}."""
    U = frozenset(U)
    inverse = inverse_permutation(sigma)
    return frozenset(i for i in range(len(sigma)) if (inverse[i], i) in U)


def e_sigma_u(m: AbelianModel, sigma: Sequence[int], U: Iterable[Cell]) -> EndoQ:
    return idempotent(m, twisted_support(sigma, U))


def liverpool_check(m: AbelianModel, A: Iterable[int], B: Iterable[int]) -> LiverpoolOutcome:
    """Test the subsets lemma: 2e_A + e_B integral forces A, B in {empty, I}."""
    require_hypothesis(m)
    A, B = _check_subset(m, A), _check_subset(m, B)
    trivial = (frozenset(), frozenset(m.indices))
    query = idempotent(m, A).scale(2) + idempotent(m, B)
    if is_integral(m, query) and not (A in trivial and B in trivial):
        logger.warning("Subsets lemma violated at A=%s, B=%s", sorted(A), sorted(B))
        return LiverpoolOutcome.VIOLATES
    return LiverpoolOutcome.CONSISTENT


# ---- End(J) ----


def endomorphism_basis(m: AbelianModel) -> list[EndoQ]:
    """A Z-basis of End(J) = {x : x Lambda in Lambda} (LATTICE mode).

    x is written in the Q-basis omega^p E_rc; the integrality conditions are the
    lattice coordinates of x*w for every generator w, so End(J) is the dual of the
    row lattice of that coordinate map.
    """
    if m.mode is not Mode.LATTICE:
        raise UnsupportedQuery("End(J) needs a lattice model")
    g, d = m.g, m.d
    zero = QuadInt(Fraction(0), Fraction(0), d)
    omega_powers = (QuadInt(Fraction(1), Fraction(0), d), QuadInt.sqrt_minus_d(d))
    units = [(r, c, p) for r in range(g) for c in range(g) for p in (0, 1)]
    columns = []
    for r, c, p in units:
        column: list[Fraction] = []
        for w in m.generators:
            image = [zero] * g
            image[r] = omega_powers[p] * w[c]
            column.extend(lattice_coordinates(m.lattice, realify(image)))
        columns.append(column)
    row_lattice = ZLattice.from_generators(list(zip(*columns)), len(units))
    inverse = sympy.Matrix(
        [[sympy.Rational(x.numerator, x.denominator) for x in row] for row in row_lattice.basis]
    ).inv()

    basis = []
    for j in range(len(units)):
        entries = [zero] * (g * g)
        for i, (r, c, p) in enumerate(units):
            value = inverse[i, j]
            if value != 0:
                coefficient = Fraction(int(value.p), int(value.q))
                entries[r * g + c] = entries[r * g + c] + omega_powers[p] * coefficient
        basis.append(ExactMatrix(g, g, tuple(entries)))
    logger.debug("End(J) basis of %d elements for model %s", len(basis), m.name)
    return basis


def matrix_from_json(rows: Sequence[Sequence[Any]], d: int) -> EndoQ:
    """Rows of entries given as integers, [num, den] or [[a_num, a_den], [b_num, b_den]]."""
    if not rows or any(not isinstance(row, (list, tuple)) for row in rows):
        raise InvalidInput("a matrix is a non-empty list of rows")
    try:
        return ExactMatrix.from_rows([[_read_glue_entry(x, d) for x in row] for row in rows], d)
    except LatticeError as exc:
        raise InvalidInput(str(exc)) from exc
