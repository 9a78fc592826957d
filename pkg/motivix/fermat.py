"""The Fermat sextic C6: x^6 + y^6 + z^6 = 0 and its three maps onto E: v^2 = u^3 - 1.

Everything runs in the affine chart z = 1 with the canonical generator
omega = (x dy - y dx) / z^5 = dx / y^5. Holomorphic forms are f * omega with f of
total degree <= 3, and the Sigma_3 action splits them as V111 + V210 + V300.

Number-field constants are kept as symbols reduced by their minimal polynomials:

    eps    t^2 - t + 1   (primitive sixth root of unity)
    cbrt4  t^3 - 4
    i      t^2 + 1
"""

from __future__ import annotations

import logging
import random
import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import permutations, product
from math import prod
from typing import Any, Sequence

import sympy
from sympy.combinatorics import Permutation
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from tqdm import tqdm

from motivix import config
from motivix.cmlat import AbelianModel, Mode, build_model
from motivix.corr import GridProjectors, build_grids
from motivix.errors import InvalidInput, OracleError, ReductionError
from motivix.motcalc import product_of_curves

logger = logging.getLogger(__name__)

x, y, s = sympy.symbols("x y s")
u, v = sympy.symbols("u v")
eps, cbrt4, i_ = sympy.symbols("eps cbrt4 i")

CONSTANTS: dict[sympy.Symbol, sympy.Expr] = {
    eps: eps**2 - eps + 1,
    cbrt4: cbrt4**3 - 4,
    i_: i_**2 + 1,
}
CONSTANT_NAMES = {str(c): c for c in CONSTANTS}

PUBLISHED_EXPONENTS = (6,) * 6 + (24,) * 3 + (4,)
G1: tuple[tuple[int, ...], ...] = tuple(permutations(range(3)))
# representatives moving y^3 onto each coordinate cube
G2: tuple[tuple[int, ...], ...] = ((0, 1, 2), (1, 0, 2), (0, 2, 1))


class Rep(str, Enum):
    V111 = "V111"
    V210 = "V210"
    V300 = "V300"
    NONE = "NONE"


REP_MONOMIALS: dict[Rep, frozenset[tuple[int, int, int]]] = {
    Rep.V111: frozenset({(1, 1, 1)}),
    Rep.V300: frozenset({(3, 0, 0), (0, 3, 0), (0, 0, 3)}),
    Rep.V210: frozenset(set(permutations((2, 1, 0)))),
}
DEGREE3_MONOMIALS = tuple(sorted(((a, b, 3 - a - b) for a in range(4) for b in range(4 - a)), reverse=True))


def rep_dimension(rep: Rep | str) -> int:
    return len(REP_MONOMIALS[Rep(rep)])


# ---- expressions ----

_ALLOWED = {"x": x, "y": y, "u": u, "v": v, **CONSTANT_NAMES}
_TOKEN = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def parse_expression(text: str, variables: Sequence[str] = ("x", "y")) -> sympy.Expr:
    """Integers, x/y (or u/v), eps/cbrt4/i, + - * / ^ and parentheses."""
    allowed = {name: _ALLOWED[name] for name in (*variables, *CONSTANT_NAMES)}
    unknown = sorted(set(_TOKEN.findall(text)) - set(allowed))
    if unknown:
        raise InvalidInput(f"unknown names {unknown} in expression {text!r}")
    if re.search(r"[^\w\s+\-*/^()]", text):
        raise InvalidInput(f"expression {text!r} uses characters outside the grammar")
    try:
        expr = parse_expr(
            text,
            local_dict=allowed,
            global_dict={"Integer": sympy.Integer, "Symbol": sympy.Symbol, "Rational": sympy.Rational},
            transformations=standard_transformations + (convert_xor,),
        )
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
        raise InvalidInput(f"cannot parse {text!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr) or expr.atoms(sympy.Function) or expr.atoms(sympy.Float):
        raise InvalidInput(f"expression {text!r} is not a rational function")
    return expr


def constants_in(*exprs: sympy.Expr) -> tuple[sympy.Symbol, ...]:
    present = set().union(*(sympy.sympify(e).free_symbols for e in exprs))
    return tuple(c for c in CONSTANTS if c in present)


def constant_basis(consts: Sequence[sympy.Symbol]) -> list[sympy.Expr]:
    """Monomials in the constants below their minimal polynomial degrees."""
    ranges = [range(sympy.degree(CONSTANTS[c], c)) for c in consts]
    return [prod((c**k for c, k in zip(consts, powers)), start=sympy.Integer(1)) for powers in product(*ranges)]


def to_text(expr: sympy.Expr) -> str:
    return sympy.sstr(expr).replace("**", "^")


# ---- curves, morphisms, forms ----


@dataclass(frozen=True)
class PlaneCurve:
    """Affine plane curve F = 0; `variables` name the two coordinates."""

    name: str
    F: sympy.Expr
    variables: tuple[sympy.Symbol, sympy.Symbol] = (x, y)

    def __post_init__(self) -> None:
        if sympy.Poly(self.F, *self.variables).total_degree() < 1:
            raise InvalidInput(f"curve {self.name} has a constant equation")

    @property
    def degree(self) -> int:
        return sympy.Poly(self.F, *self.variables).total_degree()

    def in_coordinates(self, a: sympy.Expr, b: sympy.Expr) -> sympy.Expr:
        first, second = self.variables
        return self.F.subs({first: a, second: b}, simultaneous=True)

    def __str__(self) -> str:
        return f"{self.name}: {to_text(self.F)} = 0"


FERMAT_SEXTIC = PlaneCurve("fermat6", x**6 + y**6 + 1)
ELLIPTIC = PlaneCurve("elliptic", v**2 - u**3 + 1, (u, v))
# the same elliptic curve in the coordinates where it reads u'^3 + v'^3 + 1 = 0
FERMAT_CUBIC = PlaneCurve("fermat3", u**3 + v**3 + 1, (u, v))
CURVES = {curve.name: curve for curve in (FERMAT_SEXTIC, ELLIPTIC, FERMAT_CUBIC)}


@dataclass(frozen=True)
class TargetForm:
    """P du + Q dv on the target."""

    P: sympy.Expr
    Q: sympy.Expr = sympy.Integer(0)
    label: str = ""


DU_OVER_V = TargetForm(1 / v, sympy.Integer(0), "du/v")
DU_OVER_V2 = TargetForm(1 / v**2, sympy.Integer(0), "du/v^2")
FORMS = {form.label: form for form in (DU_OVER_V, DU_OVER_V2)}


@lru_cache(maxsize=32)
def _ideal(curve: PlaneCurve, consts: tuple[sympy.Symbol, ...]) -> tuple[tuple[sympy.Expr, ...], tuple[sympy.Symbol, ...]]:
    """Lex Groebner basis of (F, minimal polynomials) with y > constants > x."""
    first, second = curve.variables
    gens = (second, *consts, first)
    basis = sympy.groebner([curve.F, *(CONSTANTS[c] for c in consts)], *gens, order="lex")
    return tuple(basis.exprs), gens


def normal_form(expr: sympy.Expr, curve: PlaneCurve, consts: Sequence[sympy.Symbol] = ()) -> sympy.Expr:
    consts = tuple(c for c in CONSTANTS if c in set(consts) | sympy.sympify(expr).free_symbols)
    basis, gens = _ideal(curve, consts)
    _, remainder = sympy.reduced(sympy.expand(expr), list(basis), *gens, order="lex")
    return sympy.expand(remainder)


@dataclass(frozen=True)
class CurveMorphism:
    name: str
    u: sympy.Expr
    v: sympy.Expr
    source: PlaneCurve = FERMAT_SEXTIC
    target: PlaneCurve = ELLIPTIC
    form: TargetForm = DU_OVER_V

    def __post_init__(self) -> None:
        image = sympy.together(self.target.in_coordinates(self.u, self.v))
        numerator, _ = sympy.fraction(image)
        if normal_form(numerator, self.source) != 0:
            raise InvalidInput(f"morphism {self.name} does not map {self.source.name} into {self.target.name}")

    @property
    def constants(self) -> tuple[sympy.Symbol, ...]:
        return constants_in(self.u, self.v)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "source": self.source.name,
            "target": self.target.name,
            "u": to_text(self.u),
            "v": to_text(self.v),
            "form": self.form.label,
        }


def morphism_from_json(data: dict[str, Any]) -> CurveMorphism:
    try:
        source = CURVES[data.get("source", "fermat6")]
        target = CURVES[data.get("target", "elliptic")]
        form = FORMS[data.get("form", "du/v^2" if target is FERMAT_CUBIC else "du/v")]
        components = (parse_expression(data["u"]), parse_expression(data["v"]))
    except KeyError as exc:
        raise InvalidInput(f"morphism description is missing or names an unknown {exc}") from exc
    return CurveMorphism(data.get("name", "phi"), *components, source, target, form)


PHI1 = CurveMorphism("phi1", -(x**2), y**3)
PHI2 = CurveMorphism("phi2", y**4 / (cbrt4 * x**2), (x**6 - 1) / (2 * x**3))
PHI3 = CurveMorphism("phi3", x**2, y**2, target=FERMAT_CUBIC, form=DU_OVER_V2)
PHIS = {1: PHI1, 2: PHI2, 3: PHI3}


@dataclass(frozen=True)
class OmegaCoefficient:
    """The form f * omega on the source curve, f reduced modulo the curve."""

    f: sympy.Expr
    curve: PlaneCurve = FERMAT_SEXTIC

    def __str__(self) -> str:
        return f"{to_text(self.f)} * omega"

    def to_json(self) -> dict:
        return {"f": to_text(self.f), "form": str(self), "rep": rep_membership(self).value}


# ---- pullback ----


def _holomorphic_monomials(curve: PlaneCurve) -> list[sympy.Expr]:
    first, second = curve.variables
    top = curve.degree - 3
    return [first**a * second**b for a in range(top + 1) for b in range(top + 1 - a)]


def omega_coefficient(curve: PlaneCurve, h: sympy.Expr) -> sympy.Expr:
    """h dx written as (h F_y / F_z) * omega, with F_z from Euler's identity."""
    first, second = curve.variables
    F = curve.F
    F_x, F_y = sympy.diff(F, first), sympy.diff(F, second)
    F_z = curve.degree * F - first * F_x - second * F_y
    return h * F_y / F_z


def reduce_rational(curve: PlaneCurve, expr: sympy.Expr) -> sympy.Expr:
    """The polynomial f of degree <= deg F - 3 with f = expr on the curve.

    Undetermined coefficients over holomorphic monomials times the constant basis:
    NF(f * D) = NF(N) is linear in the unknowns.
    """
    numerator, denominator = sympy.fraction(sympy.cancel(sympy.together(expr)))
    consts = constants_in(numerator, denominator)
    if normal_form(denominator, curve, consts) == 0:
        raise ReductionError("denominator vanishes on the curve")
    shapes = [b * m for m in _holomorphic_monomials(curve) for b in constant_basis(consts)]
    unknowns = sympy.symbols(f"c0:{len(shapes)}")
    _, gens = _ideal(curve, consts)

    columns = [sympy.Poly(normal_form(shape * denominator, curve, consts), *gens).as_dict() for shape in shapes]
    target = sympy.Poly(normal_form(numerator, curve, consts), *gens).as_dict()
    keys = sorted(set(target).union(*columns))
    A = sympy.Matrix([[column.get(key, 0) for column in columns] for key in keys])
    b = sympy.Matrix([target.get(key, 0) for key in keys])
    try:
        solution, params = A.gauss_jordan_solve(b)
    except ValueError as exc:
        raise ReductionError(f"{to_text(expr)} is not a holomorphic coefficient on {curve.name}") from exc
    solution = solution.subs({t: 0 for t in params})
    f = sum((solution[k] * shape for k, shape in enumerate(shapes)), sympy.Integer(0))
    return normal_form(f, curve, consts) if consts else sympy.expand(f)


def pullback(phi: CurveMorphism, form: TargetForm | None = None) -> OmegaCoefficient:
    """phi^*(P du + Q dv) as f * omega."""
    form = form or phi.form
    curve = phi.source
    first, second = curve.variables
    slope = -sympy.diff(curve.F, first) / sympy.diff(curve.F, second)

    def along(expr: sympy.Expr) -> sympy.Expr:
        return sympy.diff(expr, first) + sympy.diff(expr, second) * slope

    at = {u: phi.u, v: phi.v}
    h = form.P.subs(at, simultaneous=True) * along(phi.u) + form.Q.subs(at, simultaneous=True) * along(phi.v)
    f = reduce_rational(curve, omega_coefficient(curve, h))
    logger.debug("%s^*(%s) = %s * omega", phi.name, form.label, to_text(f))
    return OmegaCoefficient(f, curve)


# ---- Sigma_3 action ----


def permutation_sign(sigma: Sequence[int]) -> int:
    return Permutation(list(sigma)).signature()


def _chart(sigma: Sequence[int]) -> tuple[sympy.Expr, sympy.Expr, sympy.Expr]:
    coords = (x, y, sympy.Integer(1))
    return tuple(coords[k] for k in sigma)


def homogenize(f: sympy.Expr, degree: int = 3) -> dict[tuple[int, int, int], sympy.Expr]:
    """Coefficients of f(x, y) as a form of the given degree in x, y, z."""
    if f == 0:
        return {}
    poly = sympy.Poly(f, x, y)
    if poly.total_degree() > degree:
        raise InvalidInput(f"{to_text(f)} has degree above {degree}")
    return {(a, b, degree - a - b): coeff for (a, b), coeff in poly.as_dict().items()}


def permute_form(f: OmegaCoefficient | sympy.Expr, sigma: Sequence[int]) -> OmegaCoefficient:
    """sigma^*(f omega) = sign(sigma) f(sigma(x, y, z)) omega, back in the chart z = 1."""
    expr = f.f if isinstance(f, OmegaCoefficient) else f
    X, Y, Z = _chart(sigma)
    z = sympy.Symbol("z")
    total = sum(
        (coeff * x**a * y**b * z**c for (a, b, c), coeff in homogenize(expr).items()),
        sympy.Integer(0),
    )
    permuted = total.subs({x: X, y: Y, z: Z}, simultaneous=True)
    return OmegaCoefficient(sympy.expand(permutation_sign(sigma) * permuted))


def compose_with_permutation(phi: CurveMorphism, sigma: Sequence[int]) -> CurveMorphism:
    """phi o sigma with sigma(x : y : z) = (v[s0] : v[s1] : v[s2]), read in the chart z = 1."""
    X, Y, Z = _chart(sigma)
    at = {x: X / Z, y: Y / Z}
    label = "".join(str(k + 1) for k in sigma)
    return CurveMorphism(
        f"{phi.name}*s{label}",
        sympy.cancel(phi.u.subs(at, simultaneous=True)),
        sympy.cancel(phi.v.subs(at, simultaneous=True)),
        phi.source,
        phi.target,
        phi.form,
    )


def rep_membership(f: OmegaCoefficient | sympy.Expr) -> Rep:
    expr = f.f if isinstance(f, OmegaCoefficient) else f
    try:
        support = frozenset(homogenize(sympy.expand(expr)))
    except InvalidInput:
        return Rep.NONE
    if not support:
        return Rep.NONE
    for rep, monomials in REP_MONOMIALS.items():
        if support <= monomials:
            return rep
    return Rep.NONE


def form_rank(forms: Sequence[OmegaCoefficient | sympy.Expr]) -> int:
    rows = []
    for f in forms:
        coefficients = homogenize(f.f if isinstance(f, OmegaCoefficient) else f)
        rows.append([coefficients.get(monomial, 0) for monomial in DEGREE3_MONOMIALS])
    return sympy.Matrix(rows).rank() if rows else 0


# ---- degree oracle ----


def _roots_mod(poly: sympy.Expr, var: sympy.Symbol, p: int) -> list[int]:
    coefficients = [int(c) for c in sympy.Poly(poly, var).all_coeffs()]
    return [t for t in range(p) if sum(c * pow(t, len(coefficients) - 1 - k, p) for k, c in enumerate(coefficients)) % p == 0]


def good_primes(phi: CurveMorphism, count: int, start: int = 29) -> list[tuple[int, dict[sympy.Symbol, int]]]:
    """Primes p = 1 mod 6 where every constant of phi has a root mod p."""
    found = []
    p = start
    while len(found) < count:
        p = sympy.nextprime(p)
        if p % 6 != 1:
            continue
        roots = {}
        for c in phi.constants:
            candidates = _roots_mod(CONSTANTS[c], c, p)
            if not candidates:
                break
            roots[c] = candidates[0]
        else:
            found.append((p, roots))
    return found


def _integral_poly(expr: sympy.Expr, gens: Sequence[sympy.Symbol], p: int) -> sympy.Expr:
    _, poly = sympy.Poly(sympy.expand(expr), *gens, domain="QQ").clear_denoms(convert=True)
    if all(c % p == 0 for c in poly.coeffs()):
        raise OracleError(f"prime {p} kills a fiber equation")
    return poly.as_expr()


def fiber_system(phi: CurveMorphism, p: int, roots: dict[sympy.Symbol, int], point: tuple[int, int]) -> list[sympy.Expr]:
    """(F, N_u - u0 D_u, N_v - v0 D_v, 1 - s D_u D_v) with constants sent to roots mod p."""
    u0, v0 = point
    gens = (s, *phi.source.variables)
    N_u, D_u = sympy.fraction(sympy.cancel(sympy.together(phi.u.subs(roots))))
    N_v, D_v = sympy.fraction(sympy.cancel(sympy.together(phi.v.subs(roots))))
    equations = [phi.source.F.subs(roots), N_u - u0 * D_u, N_v - v0 * D_v, 1 - s * D_u * D_v]
    return [_integral_poly(e, gens, p) for e in equations]


def count_standard_monomials(basis: sympy.GroebnerBasis, nvars: int) -> int:
    """Length of k[vars]/I for a zero-dimensional I, from grevlex leading monomials."""
    if list(basis.exprs) == [1]:
        return 0
    leading = [poly.monoms(order="grevlex")[0] for poly in basis.polys]
    bounds = []
    for k in range(nvars):
        pure = [m[k] for m in leading if all(e == 0 for j, e in enumerate(m) if j != k)]
        if not pure:
            return 0
        bounds.append(min(pure))
    return sum(
        1
        for monomial in product(*(range(b) for b in bounds))
        if not any(all(e >= l for e, l in zip(monomial, lm)) for lm in leading)
    )


def fiber_length(phi: CurveMorphism, p: int, roots: dict[sympy.Symbol, int], point: tuple[int, int]) -> int:
    system = fiber_system(phi, p, roots, point)
    gens = (s, *phi.source.variables)
    basis = sympy.groebner(system, *gens, modulus=p, order="grevlex")
    return count_standard_monomials(basis, len(gens))


def sample_points(phi: CurveMorphism, p: int, roots: dict[sympy.Symbol, int], count: int, rng: random.Random) -> list[tuple[int, int]]:
    a, b = phi.target.variables
    equation = sympy.Poly(phi.target.F.subs(roots), a, b)
    points: list[tuple[int, int]] = []
    for _ in range(50 * count):
        if len(points) == count:
            break
        u0 = rng.randrange(1, p)
        fiber = [v0 for v0 in range(1, p) if equation.eval({a: u0, b: v0}) % p == 0]
        if fiber:
            points.append((u0, rng.choice(fiber)))
    if not points:
        raise OracleError(f"no target points found mod {p}")
    return points


def degree(
    phi: CurveMorphism,
    primes: int | None = None,
    samples: int | None = None,
    seed: int | None = None,
    threads: int | None = None,
    progress: bool | None = None,
) -> int:
    """deg(phi) as the generic fiber length, stable across good primes."""
    primes = config.DEGREE_PRIMES if primes is None else primes
    samples = config.DEGREE_SAMPLES if samples is None else samples
    seed = config.DEGREE_SEED if seed is None else seed
    return _degree(phi, primes, samples, seed, config.resolve_threads(threads), config.SHOW_PROGRESS if progress is None else progress)


@lru_cache(maxsize=64)
def _degree(phi: CurveMorphism, primes: int, samples: int, seed: int, threads: int, progress: bool) -> int:
    tasks = []
    for p, roots in good_primes(phi, primes):
        rng = random.Random(seed * 1000003 + p)
        tasks.extend((p, roots, point) for point in sample_points(phi, p, roots, samples, rng))

    lengths: dict[int, list[int]] = {}
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = {executor.submit(fiber_length, phi, p, roots, point): (p, point) for p, roots, point in tasks}
        for future in tqdm(as_completed(futures), total=len(futures), desc=f"Fibers of {phi.name}", disable=not progress):
            p, point = futures[future]
            try:
                length = future.result()
            except OracleError as exc:
                logger.warning("Skipping sample %s mod %d for %s: %s", point, p, phi.name, exc)
                continue
            logger.debug("Fiber of %s over %s mod %d has length %d", phi.name, point, p, length)
            lengths.setdefault(p, []).append(length)

    per_prime = {p: max(values) for p, values in sorted(lengths.items())}
    for p, value in per_prime.items():
        logger.info("deg(%s) mod %d: %d", phi.name, p, value)
    if len(per_prime) < primes or 0 in per_prime.values():
        raise OracleError(f"bad reduction for {phi.name} at primes {sorted(per_prime)}")
    if len(set(per_prime.values())) != 1:
        raise OracleError(f"degree of {phi.name} is not stable across primes: {per_prime}")
    return next(iter(per_prime.values()))


# ---- the C6 instance ----


def c6_morphisms() -> list[CurveMorphism]:
    """f1..f6 = phi1 o sigma (sigma in G1), f7..f9 = phi2 o sigma (G2), f10 = phi3."""
    return (
        [compose_with_permutation(PHI1, sigma) for sigma in G1]
        + [compose_with_permutation(PHI2, sigma) for sigma in G2]
        + [PHI3]
    )


def c6_degrees(**oracle: Any) -> list[int]:
    return [degree(phi, **oracle) for phi in c6_morphisms()]


@dataclass
class C6Instance:
    model: AbelianModel
    grids: GridProjectors
    morphisms: list[CurveMorphism]
    forms: list[OmegaCoefficient]
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "model": self.model.summary(),
            "morphisms": [phi.to_json() for phi in self.morphisms],
            "forms": [form.to_json() for form in self.forms],
            "metadata": self.metadata,
        }


def build_c6_instance(**oracle: Any) -> C6Instance:
    morphisms = c6_morphisms()
    base_forms = {k: pullback(phi) for k, phi in PHIS.items()}
    forms = (
        [permute_form(base_forms[1], sigma) for sigma in G1]
        + [permute_form(base_forms[2], sigma) for sigma in G2]
        + [base_forms[3]]
    )
    reps = [rep_membership(f) for f in forms]
    expected = [Rep.V210] * 6 + [Rep.V300] * 3 + [Rep.V111]
    if reps != expected:
        raise ReductionError(f"pullbacks land in {[r.value for r in reps]}, expected {[r.value for r in expected]}")

    exponents = tuple(degree(phi, **oracle) for phi in morphisms)
    model = build_model(3, 10, mode=Mode.AXIOMATIC, exponents=exponents, name="c6")
    metadata = {
        "dim_M2_tr": product_of_curves(10).transcendental,
        "rep_dimensions": {rep.value: rep_dimension(rep) for rep in (Rep.V111, Rep.V210, Rep.V300)},
        "ranks": {
            "G1": form_rank(forms[:6]),
            "G2": form_rank(forms[6:9]),
            "phi3": form_rank(forms[9:]),
        },
        "pullbacks": {f"phi{k}": str(form) for k, form in base_forms.items()},
        "computed_exponents": list(exponents),
        "published_exponents": list(PUBLISHED_EXPONENTS),
        "exponents_match_published": exponents == PUBLISHED_EXPONENTS,
        "G1": [[k + 1 for k in sigma] for sigma in G1],
        "G2": [[k + 1 for k in sigma] for sigma in G2],
    }
    if exponents != PUBLISHED_EXPONENTS:
        logger.warning("Computed C6 exponents %s differ from the published %s", list(exponents), list(PUBLISHED_EXPONENTS))
    return C6Instance(model, build_grids(model), morphisms, forms, metadata)
