"""Chow-Kunneth bookkeeping: motive expressions with dimension vectors per weight."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Sequence

from motivix.errors import InvalidInput

logger = logging.getLogger(__name__)


class Node(str, Enum):
    UNIT = "UNIT"
    LEFSCHETZ_POW = "LEFSCHETZ_POW"
    CURVE_H1 = "CURVE_H1"
    SURFACE_PART = "SURFACE_PART"
    DIRECT_SUM = "DIRECT_SUM"
    TENSOR = "TENSOR"
    HYPERSURFACE_MIDDLE = "HYPERSURFACE_MIDDLE"


SURFACE_TAGS = ("M1", "M2alg", "M2tr", "M3")


def primitive_middle_betti(n: int, d: int) -> int:
    """Primitive middle Betti number of a smooth degree-d hypersurface of dimension n."""
    return ((d - 1) ** (n + 2) + (-1) ** n * (d - 1)) // d


@dataclass(frozen=True)
class MotiveExpr:
    kind: Node
    label: str = ""
    params: tuple[tuple[str, Any], ...] = ()
    children: tuple["MotiveExpr", ...] = ()

    def param(self, name: str) -> Any:
        return dict(self.params)[name]

    def dims(self) -> tuple[int, ...]:
        """Dimension per cohomological weight, index = weight."""
        kind = self.kind
        if kind is Node.UNIT:
            return (1,)
        if kind is Node.LEFSCHETZ_POW:
            k = self.param("k")
            return (0,) * (2 * k) + (1,)
        if kind is Node.CURVE_H1:
            return (0, 2 * self.param("g"))
        if kind is Node.SURFACE_PART:
            tag, b2, rho, q = (self.param(name) for name in ("tag", "b2", "rho", "q"))
            return {
                "M1": (0, 2 * q),
                "M2alg": (0, 0, rho),
                "M2tr": (0, 0, b2 - rho),
                "M3": (0, 0, 0, 2 * q),
            }[tag]
        if kind is Node.HYPERSURFACE_MIDDLE:
            n, d = self.param("n"), self.param("d")
            return (0,) * n + (primitive_middle_betti(n, d) + (1 if n % 2 == 0 else 0),)
        if kind is Node.DIRECT_SUM:
            return _add_dims(child.dims() for child in self.children)
        left, right = self.children
        return _cauchy(left.dims(), right.dims())

    def total_dim(self) -> int:
        return sum(self.dims())

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "label": self.label,
            "params": {name: value for name, value in self.params},
            "children": [child.to_json() for child in self.children],
            "dims": list(self.dims()),
        }

    def __str__(self) -> str:
        if self.kind is Node.DIRECT_SUM:
            return " + ".join(str(child) for child in self.children) or "0"
        if self.kind is Node.TENSOR:
            return "(" + " x ".join(str(child) for child in self.children) + ")"
        return self.label


def _add_dims(vectors: Iterable[Sequence[int]]) -> tuple[int, ...]:
    acc: dict[int, int] = defaultdict(int)
    for vector in vectors:
        for weight, dim in enumerate(vector):
            acc[weight] += dim
    if not acc:
        return ()
    return tuple(acc[w] for w in range(max(acc) + 1))


def _cauchy(left: Sequence[int], right: Sequence[int]) -> tuple[int, ...]:
    out = [0] * (len(left) + len(right) - 1) if left and right else []
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            out[i + j] += a * b
    return tuple(out)


# ---- constructors ----


def unit() -> MotiveExpr:
    return MotiveExpr(Node.UNIT, "1")


def lefschetz(k: int = 1) -> MotiveExpr:
    if k < 0:
        raise InvalidInput("Lefschetz powers are non-negative")
    if k == 0:
        return unit()
    return MotiveExpr(Node.LEFSCHETZ_POW, "L" if k == 1 else f"L^{k}", (("k", k),))


def curve_h1(g: int, name: str = "C") -> MotiveExpr:
    return MotiveExpr(Node.CURVE_H1, f"M1({name})", (("g", g),))


def surface_part(tag: str, b2: int, rho: int, q: int, name: str = "S") -> MotiveExpr:
    if tag not in SURFACE_TAGS:
        raise InvalidInput(f"unknown surface summand {tag}")
    label = f"L^(+{rho})" if tag == "M2alg" else f"{tag}({name})"
    return MotiveExpr(Node.SURFACE_PART, label, (("tag", tag), ("b2", b2), ("rho", rho), ("q", q)))


def direct_sum(parts: Iterable[MotiveExpr], label: str = "") -> MotiveExpr:
    flat: list[MotiveExpr] = []
    for part in parts:
        if part.kind is Node.DIRECT_SUM and not part.label:
            flat.extend(part.children)
        else:
            flat.append(part)
    return MotiveExpr(Node.DIRECT_SUM, label, (), tuple(flat))


def tensor(left: MotiveExpr, right: MotiveExpr) -> MotiveExpr:
    """Tensor product, distributed over direct sums; units and Lefschetz powers absorbed."""
    if left.kind is Node.DIRECT_SUM:
        return direct_sum(tensor(child, right) for child in left.children)
    if right.kind is Node.DIRECT_SUM:
        return direct_sum(tensor(left, child) for child in right.children)
    if left.kind is Node.UNIT:
        return right
    if right.kind is Node.UNIT:
        return left
    if left.kind is Node.LEFSCHETZ_POW and right.kind is Node.LEFSCHETZ_POW:
        return lefschetz(left.param("k") + right.param("k"))
    return MotiveExpr(Node.TENSOR, "", (), (left, right))


def weight_table(expr: MotiveExpr) -> list[dict[str, int]]:
    return [{"weight": w, "dim": dim} for w, dim in enumerate(expr.dims())]


# ---- curves and surfaces ----


def ck_curve(g: int, name: str = "C") -> MotiveExpr:
    """M(C) = 1 + M1(C) + L."""
    if g < 0:
        raise InvalidInput("genus must be non-negative")
    parts = [unit()] + ([curve_h1(g, name)] if g else []) + [lefschetz(1)]
    return direct_sum(parts)


def ck_surface(b2: int, rho: int, q: int = 0, name: str = "S") -> MotiveExpr:
    """M(S) = 1 + M1 + L^(+rho) + M2tr + M3 + L^2."""
    if not 0 <= rho <= b2:
        raise InvalidInput(f"need 0 <= rho <= b2, got rho={rho}, b2={b2}")
    if q < 0:
        raise InvalidInput("irregularity must be non-negative")
    return direct_sum(
        [
            unit(),
            surface_part("M1", b2, rho, q, name),
            surface_part("M2alg", b2, rho, q, name),
            surface_part("M2tr", b2, rho, q, name),
            surface_part("M3", b2, rho, q, name),
            lefschetz(2),
        ]
    )


def surface_dimensions(expr: MotiveExpr) -> dict[str, int]:
    """Algebraic and transcendental weight-2 dimensions of a ck_surface expression."""
    alg = tr = 0
    for child in expr.children:
        if child.kind is Node.SURFACE_PART and child.param("tag") == "M2alg":
            alg += child.dims()[2]
        elif child.kind is Node.SURFACE_PART and child.param("tag") == "M2tr":
            tr += child.dims()[2]
    return {"M2alg": alg, "M2tr": tr, "b2": expr.dims()[2]}


@dataclass(frozen=True)
class ProductAccounting:
    g: int
    expr: MotiveExpr
    transcendental: int
    algebraic: int
    ns_rank: int
    b2: int
    total: int
    elliptically_split: bool
    grid: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "dims": list(self.expr.dims()),
            "M2tr": self.transcendental,
            "M2alg": self.algebraic,
            "ns_rank": self.ns_rank,
            "b2": self.b2,
            "total": self.total,
            "elliptically_split": self.elliptically_split,
            "grid": self.grid,
        }


def product_of_curves(g: int, elliptically_split: bool = True) -> ProductAccounting:
    """M(C x C) for a genus-g curve whose Jacobian is isogenous to E^g with E CM."""
    expr = tensor(ck_curve(g), ck_curve(g))
    grid: dict[str, Any] = {}
    if elliptically_split:
        # M2tr = sum of T_ij, each of dimension 2; the algebraic side adds L (x) 1 and 1 (x) L
        grid = {
            "T_cells": g * g,
            "T_dim": 2,
            "A_cells": g * g,
            "A_dim": 2,
            "extra_lefschetz": 2,
        }
    return ProductAccounting(
        g=g,
        expr=expr,
        transcendental=2 * g * g,
        algebraic=2 * g * g + 2,
        ns_rank=2 + 2 * g * g,
        b2=expr.dims()[2],
        total=expr.total_dim(),
        elliptically_split=elliptically_split,
        grid=grid,
    )


def elliptic_times_curve(g: int) -> dict[str, int]:
    """E x C with J(C) ~ E^g: M1(E) (x) M1(C) has dimension 4g, half of it algebraic."""
    if g < 1:
        raise InvalidInput("genus must be positive")
    return {"M1xM1": 4 * g, "M2tr": 2 * g, "M2alg_from_M1xM1": 2 * g}


# ---- hypersurfaces ----


@dataclass(frozen=True)
class CKClass:
    """delta * Delta + sum c_ab gamma^a x gamma^b."""

    delta: Fraction
    terms: tuple[tuple[tuple[int, int], Fraction], ...]

    @classmethod
    def build(cls, delta: Fraction | int, terms: dict[tuple[int, int], Fraction]) -> "CKClass":
        return cls(Fraction(delta), tuple(sorted((k, v) for k, v in terms.items() if v)))

    def __add__(self, other: "CKClass") -> "CKClass":
        acc: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for key, value in self.terms + other.terms:
            acc[key] += value
        return CKClass.build(self.delta + other.delta, acc)

    def __neg__(self) -> "CKClass":
        return CKClass.build(-self.delta, {k: -v for k, v in self.terms})

    def __sub__(self, other: "CKClass") -> "CKClass":
        return self + (-other)

    def __str__(self) -> str:
        parts = [f"{self.delta}*Delta"] if self.delta else []
        parts += [f"{c}*g^{a}xg^{b}" for (a, b), c in self.terms]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class CKProjectorRing:
    """Q[gamma]/(gamma^(n+1)) (x) itself with <gamma^n> = d."""

    n: int
    d: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise InvalidInput("hypersurfaces need n >= 1 and d >= 1")

    def delta(self) -> CKClass:
        return CKClass.build(1, {})

    def zero(self) -> CKClass:
        return CKClass.build(0, {})

    def product(self, a: int, b: int, coeff: Fraction | int = 1) -> CKClass:
        if not (0 <= a <= self.n and 0 <= b <= self.n):
            return self.zero()
        return CKClass.build(0, {(a, b): Fraction(coeff)})

    def degree(self, k: int) -> int:
        return self.d if k == self.n else 0

    def compose(self, x: CKClass, y: CKClass) -> CKClass:
        """(A x B) o (C x D) = <B.C> (A x D); Delta is the unit."""
        acc: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for key, value in x.terms:
            acc[key] += value * y.delta
        for key, value in y.terms:
            acc[key] += value * x.delta
        for (a, b), u in x.terms:
            for (c, e), v in y.terms:
                pairing = self.degree(b + c)
                if pairing:
                    acc[(a, e)] += u * v * pairing
        return CKClass.build(x.delta * y.delta, acc)

    def _middle_excluded(self, j: int) -> bool:
        return self.n % 2 == 0 and 2 * j == self.n

    def projectors(self) -> dict[int, CKClass]:
        """pi_2j = (1/d) gamma^(n-j) x gamma^j, and the middle pi_n = Delta - sum of the others."""
        out: dict[int, CKClass] = {}
        for j in range(self.n + 1):
            if not self._middle_excluded(j):
                out[2 * j] = self.product(self.n - j, j, Fraction(1, self.d))
        middle = self.delta()
        for projector in out.values():
            middle = middle - projector
        out[self.n] = middle
        return dict(sorted(out.items()))

    def primitive_projector(self) -> CKClass:
        total = self.delta()
        for j in range(self.n + 1):
            total = total - self.product(self.n - j, j, Fraction(1, self.d))
        return total

    def verify(self) -> dict[str, bool]:
        projectors = self.projectors()
        total = self.zero()
        for projector in projectors.values():
            total = total + projector
        idempotent = all(self.compose(p, p) == p for p in projectors.values())
        orthogonal = all(
            self.compose(p, q) == self.zero()
            for i, p in projectors.items()
            for j, q in projectors.items()
            if i != j
        )
        return {"idempotent": idempotent, "orthogonal": orthogonal, "sums_to_diagonal": total == self.delta()}

    def middle_dimension(self) -> int:
        return primitive_middle_betti(self.n, self.d) + (1 if self.n % 2 == 0 else 0)

    def integral_projectors(self, divisible_from: int) -> dict[str, bool]:
        """Which projectors have integral coefficients once gamma^k is divisible by d for k >= divisible_from."""

        def certified(a: int, b: int) -> bool:
            return self.d == 1 or max(a, b) >= divisible_from

        out: dict[str, bool] = {}
        for j in range(self.n + 1):
            if not self._middle_excluded(j):
                out[f"pi_{2 * j}"] = certified(self.n - j, j)
        out[f"pi_{self.n}"] = all(out.values())
        out["pi_prim"] = all(certified(self.n - j, j) for j in range(self.n + 1))
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "projectors": {f"pi_{k}": str(v) for k, v in self.projectors().items()},
            "checks": self.verify(),
            "middle_dimension": self.middle_dimension(),
        }


def hypersurface_ck(n: int, d: int) -> CKProjectorRing:
    ring = CKProjectorRing(n, d)
    checks = ring.verify()
    if not all(checks.values()):
        raise InvalidInput(f"projector identities fail for n={n}, d={d}: {checks}")
    return ring


def hypersurface_motive(n: int, d: int, rho_mid: int | None = None) -> MotiveExpr:
    middle_betti = primitive_middle_betti(n, d) + (1 if n % 2 == 0 else 0)
    if rho_mid is None:
        rho_mid = 1 if n % 2 == 0 else 0
    if not 0 <= rho_mid <= middle_betti:
        raise InvalidInput(f"rho_mid must lie in [0, {middle_betti}]")
    parts = [lefschetz(j) for j in range(n + 1) if not (n % 2 == 0 and 2 * j == n)]
    middle = MotiveExpr(
        Node.HYPERSURFACE_MIDDLE, f"M{n}(X)", (("n", n), ("d", d), ("rho_mid", rho_mid))
    )
    parts.insert((n + 1) // 2, middle)
    return direct_sum(parts)


def cubic_fourfold_motive(rho2: int = 1) -> MotiveExpr:
    """1 + L + M4(X) + L^3 + L^4."""
    return hypersurface_motive(4, 3, rho2)


# ---- blow-ups ----


@dataclass(frozen=True)
class Center:
    kind: str
    genus: int = 0
    b2: int = 0
    rho: int = 0
    q: int = 0

    @property
    def dimension(self) -> int:
        return {"point": 0, "curve": 1, "surface": 2}[self.kind]

    def motive(self) -> MotiveExpr:
        if self.kind == "point":
            return unit()
        if self.kind == "curve":
            return ck_curve(self.genus)
        return ck_surface(self.b2, self.rho, self.q)

    @classmethod
    def parse(cls, raw: Any) -> "Center":
        if isinstance(raw, Center):
            return raw
        if raw == "point" or raw == {"kind": "point"}:
            return cls("point")
        if isinstance(raw, dict) and raw.get("kind") in {"curve", "surface"}:
            try:
                return cls(**raw)
            except TypeError as exc:
                raise InvalidInput(f"bad blow-up center {raw!r}: {exc}") from exc
        raise InvalidInput(f"unsupported blow-up center {raw!r}")


def projective_space(n: int) -> MotiveExpr:
    return direct_sum([lefschetz(k) for k in range(n + 1)], label=f"M(P^{n})")


def blowup_chain(
    start: MotiveExpr, centers: Sequence[Any], ambient_dim: int = 4
) -> MotiveExpr:
    """M(Y) = M(X) + sum over centers Z of M(Z) (x) (L + ... + L^(codim Z - 1))."""
    extra: list[MotiveExpr] = []
    for raw in centers:
        center = Center.parse(raw)
        codim = ambient_dim - center.dimension
        if codim < 2:
            raise InvalidInput(
                f"a {center.kind} center in a {ambient_dim}-dimensional variety has codimension {codim}"
            )
        twist = direct_sum([lefschetz(k) for k in range(1, codim)])
        extra.append(tensor(center.motive(), twist))
    return direct_sum([start] + extra)


def blowup_increments(centers: Sequence[Any], ambient_dim: int = 4) -> dict[str, tuple[int, ...]]:
    """The M0 / M1 / M2 rows: contributions of point, curve and surface centers."""
    rows: dict[str, list[MotiveExpr]] = {"M0": [], "M1": [], "M2": []}
    for raw in centers:
        center = Center.parse(raw)
        rows[f"M{center.dimension}"].append(blowup_chain(direct_sum([]), [center], ambient_dim))
    width = 2 * ambient_dim + 1
    out = {}
    for key, parts in rows.items():
        dims = _add_dims(part.dims() for part in parts)
        out[key] = tuple(dims) + (0,) * (width - len(dims))
    return out


# ---- the cubic fourfold ledger ----

HOST_CANNOT = "cannot host"
HOST_EQUALITY = "hosting forces equality, violating nontriviality of both summands"
HOST_POSSIBLE = "could host with both summands nontrivial"
NO_HOST = "no host available"


def cubic_rationality_ledger(
    surfaces: Sequence[Sequence[int]],
    curves: Sequence[int] = (),
    points: int = 0,
    b4: int = 23,
    rho2: int = 1,
) -> dict[str, Any]:
    """Dimension bookkeeping for a resolution P^4 <- Y -> X of a very general cubic fourfold."""
    target = b4 - rho2
    centers: list[Any] = ["point"] * points
    centers += [Center("curve", genus=g) for g in curves]
    verdicts = []
    for b2, rho, q in surfaces:
        centers.append(Center("surface", b2=b2, rho=rho, q=q))
        tr = surface_dimensions(ck_surface(b2, rho, q))["M2tr"]
        if tr < target:
            verdict = HOST_CANNOT
        elif tr == target:
            verdict = HOST_EQUALITY
        else:
            verdict = HOST_POSSIBLE
        verdicts.append({"b2": b2, "rho": rho, "q": q, "M2tr": tr, "verdict": verdict})
    hosts = [entry for entry in verdicts if entry["verdict"] == HOST_POSSIBLE]
    ring = CKProjectorRing(4, 3)
    resolved = blowup_chain(projective_space(4), centers)
    logger.info("Cubic ledger: M4tr dimension %d against %d surfaces", target, len(verdicts))
    return {
        "M4tr_dim": target,
        "b4": b4,
        "rho2": rho2,
        "surfaces": verdicts,
        "summary": NO_HOST if not hosts else HOST_POSSIBLE,
        "strict_containment_required": True,
        "cubic_motive": cubic_fourfold_motive(rho2).to_json(),
        "integral_projectors": ring.integral_projectors(divisible_from=3),
        "resolution_dims": list(resolved.dims()),
    }
