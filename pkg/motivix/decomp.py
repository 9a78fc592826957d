"""Essential indecomposability of M(C x C).

A putative decomposition M^2_tr = Lambda + Xi is described by which cells of the
grids A1, A2 and Theta go to Lambda (a Candidate). Convolution with an integral
endomorphism Sigma sends Lambda to an endomorphism whose (j, i) entry is
coef(i, j) * rosati(Sigma)_ji, so integrality of Lambda forces integrality of
these images. Two procedures are offered:

    EXHAUSTIVE  enumerate every candidate (modulo Lambda <-> Xi) through local
                probe tables and refute each one; g <= 4.
    PROOFTRACE  run the two-case derivation over symbolic subsets, checking each
                step against the integrality oracle; any g. On lattice models the
                cells a transposition cannot settle (g = 2, or a non-integral
                transposition) are searched with the diagonal fixed and the End(J)
                basis as extra probes.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Any, Iterator, Mapping, Sequence

from tqdm import tqdm

from motivix import config
from motivix.cmlat import (
    AbelianModel,
    Cell,
    EndoQ,
    LiverpoolOutcome,
    Mode,
    PermEndoSpec,
    endomorphism_basis,
    format_permutation,
    full_grid,
    identity_permutation,
    idempotent,
    integer_pattern_integral,
    inverse_permutation,
    is_integral,
    liverpool_check,
    perm_endo,
    proper_subsets,
    require_hypothesis,
    rosati,
    transposition,
)
from motivix.corr import build_grids, conv
from motivix.errors import CandidateError, InvalidInput, UnsupportedQuery
from motivix.exact import ExactMatrix, QuadInt

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_G = 4
FULL_LIVERPOOL_SCAN_MAX_G = 6

# B^{s,t} summands are indexed by K^2 minus the middle cell
L_CELLS = frozenset((s, t) for s in range(3) for t in range(3) if (s, t) != (1, 1))

# (w, u, v): 1 puts the cell of the Theta, A1, A2 grid on Lambda. Lambda-first.
Assignment = tuple[int, int, int]
ASSIGNMENTS: tuple[Assignment, ...] = tuple(product((1, 0), repeat=3))

TRUSTED_REDUCTIONS = (
    "semisimplicity fixes the grid shape of any decomposition of M^2_tr(C x C)",
    "B-type summands are balanced and vanish under every convolution",
)


def assignment_coef(a: Assignment) -> Fraction:
    w, u, v = a
    return 2 * w - Fraction(u + v, 2)


class DecisionMode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    PROOFTRACE = "prooftrace"


class Status(str, Enum):
    INDECOMPOSABLE = "INDECOMPOSABLE"
    SURVIVING_CANDIDATE = "SURVIVING_CANDIDATE"
    UNDECIDED = "UNDECIDED"


class RefuteStatus(str, Enum):
    REFUTED = "REFUTED"
    PASSES = "PASSES"
    UNDECIDED = "UNDECIDED"


class TraceLevel(str, Enum):
    NONE = "none"
    STEPS = "steps"
    FULL = "full"


class Side(str, Enum):
    LAMBDA = "LAMBDA"
    XI = "XI"


# ---- candidates ----


@dataclass(frozen=True)
class Candidate:
    """Cells of I^2 (0-based) sent to Lambda per grid; Xi holds the complements."""

    g: int
    u_lambda: frozenset[Cell]
    v_lambda: frozenset[Cell]
    w_lambda: frozenset[Cell]
    l_lambda: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        for name in ("u_lambda", "v_lambda", "w_lambda", "l_lambda"):
            object.__setattr__(self, name, frozenset(tuple(cell) for cell in getattr(self, name)))

    @classmethod
    def full(cls, g: int) -> "Candidate":
        grid = full_grid(g)
        return cls(g, grid, grid, grid, L_CELLS)

    @classmethod
    def empty(cls, g: int) -> "Candidate":
        return cls(g, frozenset(), frozenset(), frozenset(), frozenset())

    @classmethod
    def from_assignment(cls, g: int, assignment: Mapping[Cell, Assignment]) -> "Candidate":
        if set(assignment) != set(full_grid(g)):
            raise CandidateError("an assignment must cover every cell of I^2")
        return cls(
            g,
            frozenset(cell for cell, (_, u, _) in assignment.items() if u),
            frozenset(cell for cell, (_, _, v) in assignment.items() if v),
            frozenset(cell for cell, (w, _, _) in assignment.items() if w),
        )

    def side(self, grid: str, cell: Cell) -> Side:
        cells = {"u": self.u_lambda, "v": self.v_lambda, "w": self.w_lambda}[grid]
        return Side.LAMBDA if cell in cells else Side.XI

    def sides(self) -> dict[str, dict[str, str]]:
        """Per cell (1-based "i,j"), the side of each grid: {"w": "LAMBDA", ...}."""
        return {
            f"{i + 1},{j + 1}": {grid: self.side(grid, (i, j)).value for grid in "wuv"}
            for i, j in sorted(full_grid(self.g))
        }

    def swap(self) -> "Candidate":
        grid = full_grid(self.g)
        return Candidate(
            self.g,
            grid - self.u_lambda,
            grid - self.v_lambda,
            grid - self.w_lambda,
            L_CELLS - self.l_lambda,
        )

    def validate(self, g: int) -> None:
        if self.g != g:
            raise CandidateError(f"candidate for g={self.g} used on a model with g={g}")
        grid = full_grid(g)
        for name in ("u_lambda", "v_lambda", "w_lambda"):
            stray = getattr(self, name) - grid
            if stray:
                raise CandidateError(f"{name} has cells outside I^2: {sorted(stray)}")
        if not self.l_lambda <= L_CELLS:
            raise CandidateError(f"l_lambda has cells outside K^2 minus (1,1): {sorted(self.l_lambda - L_CELLS)}")

    def is_nontrivial(self) -> bool:
        return bool(self.w_lambda) and self.w_lambda != full_grid(self.g)

    def assignment(self, cell: Cell) -> Assignment:
        return int(cell in self.w_lambda), int(cell in self.u_lambda), int(cell in self.v_lambda)

    def coef(self, cell: Cell) -> Fraction:
        """Weight with which Lambda sees the cell: 2[W] - 1/2[U] - 1/2[V]."""
        return assignment_coef(self.assignment(cell))

    def coefs(self) -> dict[Cell, Fraction]:
        return {cell: self.coef(cell) for cell in sorted(full_grid(self.g))}

    def to_json(self) -> dict:
        def cells(values: frozenset[Cell], shift: int = 1) -> list[list[int]]:
            return [[i + shift, j + shift] for i, j in sorted(values)]

        return {
            "g": self.g,
            "u_lambda": cells(self.u_lambda),
            "v_lambda": cells(self.v_lambda),
            "w_lambda": cells(self.w_lambda),
            "l_lambda": cells(self.l_lambda, shift=0),
            "sides": self.sides(),
        }


# ---- probes ----


@dataclass(frozen=True)
class Probe:
    """An integral endomorphism Sigma used to convolve a candidate.

    `transposed` is rosati(Sigma), the endomorphism the two images add up to.
    """

    kind: str
    label: str
    endo: EndoQ
    transposed: EndoQ
    sigma: tuple[int, ...] | None = None

    @property
    def rule(self) -> str:
        if self.kind == "lattice":
            return "lattice"
        return "case1" if self.sigma == identity_permutation(len(self.sigma)) else "case2"

    @property
    def cells(self) -> tuple[Cell, ...]:
        """Cells (i, j) whose coefficient reaches the image."""
        g = self.transposed.rows
        return tuple((i, j) for i in range(g) for j in range(g) if not self.transposed[j, i].is_zero())

    def to_json(self) -> dict:
        return {
            "id": self.label,
            "kind": self.kind,
            "sigma": None if self.sigma is None else [k + 1 for k in self.sigma],
        }


def permutation_probe(m: AbelianModel, sigma: Sequence[int]) -> Probe:
    endo = perm_endo(m, PermEndoSpec(tuple(sigma)))
    return Probe("permutation", format_permutation(sigma), endo, rosati(endo, m), tuple(sigma))


def probes_for(m: AbelianModel) -> list[Probe]:
    """The identity probe followed by every transposition (i j), i < j."""
    probes = [permutation_probe(m, identity_permutation(m.g))]
    for i in range(m.g):
        for j in range(i + 1, m.g):
            probes.append(permutation_probe(m, transposition(m.g, i, j)))
    return probes


def lattice_probes(m: AbelianModel) -> list[Probe]:
    """Sigma = rosati(P) for P running over a Z-basis of End(J)."""
    return [
        Probe("lattice", f"End[{k + 1}]", rosati(basis_element, m), basis_element)
        for k, basis_element in enumerate(endomorphism_basis(m))
    ]


def probe_is_integral(m: AbelianModel, probe: Probe) -> bool:
    """Both Sigma and rosati(Sigma) must be integral for the probe to be sound.

    Axiomatic models take permutation probes as integral.
    """
    if m.mode is Mode.AXIOMATIC:
        return probe.kind == "permutation"
    return is_integral(m, probe.endo) and is_integral(m, probe.transposed)


@lru_cache(maxsize=8)
def _all_probes(m: AbelianModel) -> tuple[Probe, ...]:
    return tuple(probes_for(m)) + (tuple(lattice_probes(m)) if m.mode is Mode.LATTICE else ())


@lru_cache(maxsize=8)
def _grids(m: AbelianModel):
    return build_grids(m)


def eval_probe(c: Candidate, p: Probe, m: AbelianModel) -> tuple[EndoQ, EndoQ]:
    """(conv_Sigma(Lambda), conv_Sigma(Xi)) computed through the grid correspondences."""
    c.validate(m.g)
    grids = _grids(m)
    return conv(p.endo, grids.lambda_class(c)), conv(p.endo, grids.xi_class(c))


def local_image(p: Probe, coefs: Mapping[Cell, Fraction], d: int) -> EndoQ:
    """Image entry (j, i) = coef(i, j) * rosati(Sigma)_ji over the given cells."""
    g = p.transposed.rows
    zero = QuadInt(Fraction(0), Fraction(0), d)
    entries = [zero] * (g * g)
    for (i, j), value in coefs.items():
        entries[j * g + i] = p.transposed[j, i] * value
    return ExactMatrix(g, g, tuple(entries))


# ---- integrality queries ----


def liverpool_window(values: Sequence[int]) -> bool | None:
    """Decide diag(values) by the subsets lemma: shift to 2e_A + e_B.

    Integral iff A and B are trivial, i.e. all values agree. None when the values
    do not fit a window of width 4.
    """
    low = min(values)
    if max(values) - low > 3:
        return None
    A = {k for k, v in enumerate(values) if v - low in (2, 3)}
    B = {k for k, v in enumerate(values) if v - low in (1, 3)}
    trivial = (set(), set(range(len(values))))
    return A in trivial and B in trivial


def side_query(m: AbelianModel, p: Probe, coefs: Mapping[Cell, Fraction]) -> tuple[bool | None, str]:
    """Is the image of one side integral? Returns (answer, rule); None is undecided."""
    half_integer = any(value.denominator != 1 for value in coefs.values())
    if m.mode is Mode.LATTICE:
        answer = is_integral(m, local_image(p, coefs, m.d))
        return answer, ("norm" if half_integer and not answer else p.rule)

    # axiomatic: compose with rosati(Sigma_{sigma^-1}) to land on a diagonal
    if p.sigma is None:
        raise UnsupportedQuery("axiomatic models only carry permutation probes")
    if half_integer:
        return False, "norm"
    inverse = inverse_permutation(p.sigma)
    values = [int(coefs[(inverse[j], j)]) for j in range(m.g)]
    try:
        return integer_pattern_integral(m, values), p.rule
    except UnsupportedQuery:
        return liverpool_window(values), "liverpool"


def _probe_outcome(
    m: AbelianModel, p: Probe, lam: Mapping[Cell, Fraction]
) -> tuple[RefuteStatus, str, bool | None]:
    xi = {cell: 1 - value for cell, value in lam.items()}
    answers = [side_query(m, p, lam), side_query(m, p, xi)]
    for answer, rule in answers:
        if answer is False:
            return RefuteStatus.REFUTED, rule, False
    if any(answer is None for answer, _ in answers):
        return RefuteStatus.UNDECIDED, answers[0][1], None
    return RefuteStatus.PASSES, p.rule, True


# ---- traces and verdicts ----


@dataclass
class TraceStep:
    rule: str
    outcome: str
    note: str = ""
    probe: str | None = None
    integral: bool | None = None
    query: EndoQ | None = None

    def to_json(self, level: TraceLevel = TraceLevel.STEPS) -> dict:
        payload: dict[str, Any] = {
            "probe": self.probe,
            "rule": self.rule,
            "integral": self.integral,
            "outcome": self.outcome,
            "note": self.note,
        }
        if level is TraceLevel.FULL and self.query is not None:
            payload["query"] = self.query.to_json()
        return payload

    def __str__(self) -> str:
        head = f"[{self.rule}]" + (f" {self.probe}" if self.probe else "")
        return f"{head}: {self.outcome}" + (f" ({self.note})" if self.note else "")


@dataclass
class Refutation:
    status: RefuteStatus
    rule: str | None = None
    probe: str | None = None
    steps: list[TraceStep] = field(default_factory=list)

    def to_json(self, level: TraceLevel = TraceLevel.STEPS) -> dict:
        return {
            "status": self.status.value,
            "rule": self.rule,
            "probe": self.probe,
            "steps": [] if level is TraceLevel.NONE else [s.to_json(level) for s in self.steps],
        }


@dataclass
class Verdict:
    status: Status
    mode: DecisionMode
    model: str
    probes: list[str]
    trace: list[TraceStep]
    witness: Candidate | None = None
    stats: dict[str, Any] = field(default_factory=dict)

    def to_json(self, level: TraceLevel | str = TraceLevel.STEPS) -> dict:
        level = TraceLevel(level)
        return {
            "status": self.status.value,
            "mode": self.mode.value,
            "model": self.model,
            "probes": self.probes,
            "steps": [] if level is TraceLevel.NONE else [s.to_json(level) for s in self.trace],
            "witness": None if self.witness is None else self.witness.to_json(),
            "stats": self.stats,
        }


def _header(m: AbelianModel) -> list[TraceStep]:
    steps = [TraceStep("reduction", "trusted", note) for note in TRUSTED_REDUCTIONS]
    if m.mode is Mode.AXIOMATIC:
        steps.append(
            TraceStep(
                "reduction",
                "trusted",
                "atom exponents stand for the degrees of the splitting maps; permutation probes are integral",
            )
        )
    return steps


def _hypothesis_step(m: AbelianModel) -> TraceStep:
    floor = require_hypothesis(m)
    note = "g = 1, no proper subvariety" if floor is None else f"min n_K over proper K = {floor} >= 4"
    return TraceStep("hypothesis", "holds", note)


# ---- refute ----


def refute(c: Candidate, m: AbelianModel, probes: Sequence[Probe] | None = None) -> Refutation:
    """Run every sound probe on a nontrivial candidate; first failure refutes it."""
    require_hypothesis(m)
    c.validate(m.g)
    if not c.is_nontrivial():
        raise CandidateError("only nontrivial candidates (W split on both sides) can be refuted")
    if probes is None:
        probes = _all_probes(m)

    coefs = c.coefs()
    steps: list[TraceStep] = []
    undecided = False
    for p in probes:
        if not probe_is_integral(m, p):
            steps.append(TraceStep(p.rule, "skipped", "probe not integral", p.label))
            continue
        status, rule, integral = _probe_outcome(m, p, {cell: coefs[cell] for cell in p.cells})
        steps.append(TraceStep(rule, status.value.lower(), "", p.label, integral, p.transposed))
        if status is RefuteStatus.REFUTED:
            return Refutation(RefuteStatus.REFUTED, rule, p.label, steps)
        undecided = undecided or status is RefuteStatus.UNDECIDED
    return Refutation(RefuteStatus.UNDECIDED if undecided else RefuteStatus.PASSES, None, None, steps)


# ---- EXHAUSTIVE ----

# allowed assignments per pinned cell
Pins = Mapping[Cell, tuple[Assignment, ...]]

W_ON_LAMBDA: tuple[Assignment, ...] = tuple(a for a in ASSIGNMENTS if a[0] == 1)


@dataclass
class LocalTable:
    """Surviving local assignments of one probe, each with an undecided flag."""

    probe: Probe
    cells: tuple[Cell, ...]
    solutions: list[tuple[tuple[Assignment, ...], bool]]
    total: int
    rejected: dict[str, int]


def _local_table(m: AbelianModel, p: Probe, pinned: Pins) -> LocalTable:
    cells = p.cells
    cache: dict[tuple[Fraction, ...], tuple[RefuteStatus, str]] = {}
    solutions = []
    rejected: dict[str, int] = {}
    total = 0
    for combo in product(*(pinned.get(cell, ASSIGNMENTS) for cell in cells)):
        total += 1
        key = tuple(assignment_coef(a) for a in combo)
        if key not in cache:
            status, rule, _ = _probe_outcome(m, p, dict(zip(cells, key)))
            cache[key] = (status, rule)
        status, rule = cache[key]
        if status is RefuteStatus.REFUTED:
            rejected[rule] = rejected.get(rule, 0) + 1
        else:
            solutions.append((combo, status is RefuteStatus.UNDECIDED))
    logger.debug("Probe %s: %d of %d local assignments survive", p.label, len(solutions), total)
    return LocalTable(p, cells, solutions, total, rejected)


def _backtrack(
    tables: Sequence[LocalTable], index: int, state: dict[Cell, Assignment], undecided: bool
) -> Iterator[tuple[dict[Cell, Assignment], bool]]:
    if index == len(tables):
        yield dict(state), undecided
        return
    table = tables[index]
    for combo, flag in table.solutions:
        if any(state.get(cell, a) != a for cell, a in zip(table.cells, combo)):
            continue
        added = [cell for cell in table.cells if cell not in state]
        for cell, a in zip(table.cells, combo):
            state[cell] = a
        yield from _backtrack(tables, index + 1, state, undecided or flag)
        for cell in added:
            del state[cell]


def _completions(
    partial: Mapping[Cell, Assignment], free: Sequence[Cell], pinned: Pins
) -> Iterator[dict[Cell, Assignment]]:
    for combo in product(*(pinned.get(cell, ASSIGNMENTS) for cell in free)):
        completed = dict(partial)
        completed.update(zip(free, combo))
        yield completed


def _integral_permutation_probes(m: AbelianModel, steps: list[TraceStep]) -> list[Probe]:
    probes = []
    for p in probes_for(m):
        if probe_is_integral(m, p):
            probes.append(p)
        else:
            logger.warning("Skipping probe %s on %s: rosati(Sigma_J) is not integral", p.label, m.name)
            steps.append(TraceStep(p.rule, "skipped", "rosati(Sigma_J) not integral", p.label, False, p.transposed))
    return probes


def _search(
    m: AbelianModel,
    probes: Sequence[Probe],
    pinned: Pins,
    steps: list[TraceStep],
    threads: int,
    progress: bool,
    max_free_cells: int,
) -> tuple[Status, Candidate | None, dict[str, Any]]:
    """Enumerate candidates allowed by `pinned` through local probe tables.

    Partial assignments that agree across every permutation probe are completed over
    the uncovered cells and checked against the End(J) basis probes.
    """
    tables: list[LocalTable | None] = [None] * len(probes)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = {executor.submit(_local_table, m, p, pinned): k for k, p in enumerate(probes)}
        for future in tqdm(as_completed(futures), total=len(futures), desc="Local probe tables", disable=not progress):
            tables[futures[future]] = future.result()

    for table in tables:
        rejected = ", ".join(f"{rule}: {count}" for rule, count in sorted(table.rejected.items())) or "none"
        steps.append(
            TraceStep(
                table.probe.rule,
                "pruned",
                f"{len(table.solutions)} of {table.total} local assignments survive; rejected by {rejected}",
                table.probe.label,
                query=table.probe.transposed,
            )
        )

    covered = {cell for table in tables for cell in table.cells}
    free = sorted(full_grid(m.g) - covered)
    stats: dict[str, Any] = {
        "probes": len(probes),
        "free_cells": len(free),
        "leaves": 0,
        "trivial": 0,
        "refuted_by_lattice": 0,
        "undecided_leaves": 0,
        "survivors": 0,
    }
    if len(free) > max_free_cells:
        steps.append(
            TraceStep(
                "case2",
                "undecided",
                f"{len(free)} cells are not seen by any integral permutation probe (limit {max_free_cells})",
            )
        )
        return Status.UNDECIDED, None, stats
    if free:
        steps.append(
            TraceStep("case2", "enumerated", "free cells " + ", ".join(f"({i + 1},{j + 1})" for i, j in free))
        )

    extra = []
    if m.mode is Mode.LATTICE:
        extra = [p for p in lattice_probes(m) if probe_is_integral(m, p)]
        steps.append(
            TraceStep("lattice", "prepared", f"{len(extra)} integral End(J) basis probes at the leaves")
        )

    witness = None
    undecided_seen = False
    ordered = sorted(tables, key=lambda table: len(table.solutions))
    for partial, undecided in _backtrack(ordered, 0, {}, False):
        for assignment in _completions(partial, free, pinned):
            stats["leaves"] += 1
            candidate = Candidate.from_assignment(m.g, assignment)
            if not candidate.is_nontrivial():
                stats["trivial"] += 1
                continue
            leaf_status = RefuteStatus.UNDECIDED if undecided else RefuteStatus.PASSES
            coefs = candidate.coefs()
            for p in extra:
                status, _, _ = _probe_outcome(m, p, {cell: coefs[cell] for cell in p.cells})
                if status is RefuteStatus.REFUTED:
                    leaf_status = RefuteStatus.REFUTED
                    break
                if status is RefuteStatus.UNDECIDED:
                    leaf_status = RefuteStatus.UNDECIDED
            if leaf_status is RefuteStatus.REFUTED:
                stats["refuted_by_lattice"] += 1
            elif leaf_status is RefuteStatus.UNDECIDED:
                stats["undecided_leaves"] += 1
                undecided_seen = True
            else:
                stats["survivors"] += 1
                if witness is None:
                    witness = candidate

    if witness is not None:
        steps.append(TraceStep("case2", "survivor", f"{stats['survivors']} nontrivial candidates pass every probe"))
        return Status.SURVIVING_CANDIDATE, witness, stats
    if undecided_seen:
        steps.append(
            TraceStep("liverpool", "undecided", f"{stats['undecided_leaves']} candidates fall outside the derivable span")
        )
        return Status.UNDECIDED, None, stats
    steps.append(TraceStep("case2", "refuted", "every nontrivial candidate is refuted"))
    return Status.INDECOMPOSABLE, None, stats


def _exhaustive(
    m: AbelianModel, steps: list[TraceStep], threads: int, progress: bool, max_free_cells: int
) -> tuple[Status, Candidate | None, dict[str, Any]]:
    if m.g > EXHAUSTIVE_MAX_G:
        raise InvalidInput(f"EXHAUSTIVE supports g <= {EXHAUSTIVE_MAX_G}, got g = {m.g}; use PROOFTRACE")
    probes = _integral_permutation_probes(m, steps)
    # W(1,1) on Lambda picks one representative of each Lambda <-> Xi orbit
    return _search(m, probes, {(0, 0): W_ON_LAMBDA}, steps, threads, progress, max_free_cells)


# ---- PROOFTRACE ----


def _liverpool_step(m: AbelianModel) -> TraceStep:
    """2e_{W_Lambda} + e_{U_Xi} is integral, so both subsets are trivial on the diagonal."""
    indices = frozenset(m.indices)
    note_tail = "2e_{W_Lambda} + e_{U_Xi} = conv_Delta(Lambda) + id forces W_Lambda, U_Xi in {empty, I}"
    if m.mode is Mode.LATTICE and m.g <= FULL_LIVERPOOL_SCAN_MAX_G:
        subsets = [frozenset(), indices, *proper_subsets(m.g)]
        violations = sum(liverpool_check(m, A, B) is LiverpoolOutcome.VIOLATES for A in subsets for B in subsets)
        checked, undecidable = len(subsets) ** 2, 0
    else:
        subsets = [frozenset(), indices]
        subsets += [frozenset({i}) for i in m.indices] + [indices - {i} for i in m.indices]
        subsets = list(dict.fromkeys(subsets))
        trivial = (frozenset(), indices)
        violations = undecidable = checked = 0
        for A in subsets:
            for B in subsets:
                checked += 1
                try:
                    integral = is_integral(m, idempotent(m, A).scale(2) + idempotent(m, B))
                except UnsupportedQuery:
                    undecidable += 1
                    continue
                violations += integral and not (A in trivial and B in trivial)
    note = f"{checked} subset pairs checked, {violations} violations, {undecidable} outside the derivable span; {note_tail}"
    return TraceStep("liverpool", "holds" if not violations else "violated", note, integral=not violations)


def _case2_patterns(a: int, b: int, g: int) -> Iterator[dict[Cell, Assignment]]:
    """Diagonal W on Lambda with constant U = V; (a, b) or (b, a) carries W on Xi."""
    for diag_u in (1, 0):
        for first, second in product(ASSIGNMENTS, repeat=2):
            if first[0] and second[0]:
                continue
            pattern = {(k, k): (1, diag_u, diag_u) for k in range(g)}
            pattern[(a, b)] = first
            pattern[(b, a)] = second
            yield pattern


def _residual_search(
    m: AbelianModel,
    probes: Sequence[Probe],
    unsettled: Sequence[Probe],
    steps: list[TraceStep],
    threads: int,
    progress: bool,
    max_free_cells: int,
) -> tuple[Status, Candidate | None, dict[str, Any]]:
    """Settle the off-diagonal cells left open by the transposition step.

    The steps above leave only candidates whose diagonal carries (W, U, V) = (1, u, u)
    with u constant; those are enumerated and checked against the End(J) basis.
    """
    labels = ", ".join(p.label for p in unsettled)
    if m.g > EXHAUSTIVE_MAX_G:
        steps.append(TraceStep("case2", "undecided", f"cases left open by {labels} need g <= {EXHAUSTIVE_MAX_G}"))
        return Status.UNDECIDED, None, {}
    steps.append(
        TraceStep("lattice", "enumerated", f"cases left open by {labels} are searched with the diagonal fixed")
    )
    totals: dict[str, Any] = {}
    for diag_u in (1, 0):
        pinned = {(k, k): ((1, diag_u, diag_u),) for k in m.indices}
        status, witness, stats = _search(m, probes, pinned, steps, threads, progress, max_free_cells)
        for key, value in stats.items():
            totals[key] = max(totals.get(key, 0), value) if key in ("probes", "free_cells") else totals.get(key, 0) + value
        if status is not Status.INDECOMPOSABLE:
            return status, witness, totals
    return Status.INDECOMPOSABLE, None, totals


def _prooftrace(
    m: AbelianModel, steps: list[TraceStep], threads: int, progress: bool, max_free_cells: int
) -> tuple[Status, Candidate | None, dict[str, Any]]:
    if m.g == 1:
        steps.append(TraceStep("case1", "refuted", "I^2 is a single cell; no candidate splits W"))
        return Status.INDECOMPOSABLE, None, {}

    probes = probes_for(m)
    integral = list(probes)
    unsettled: list[Probe] = []
    if m.mode is Mode.LATTICE:
        integral = []
        for p in probes:
            if probe_is_integral(m, p):
                integral.append(p)
            else:
                steps.append(
                    TraceStep(p.rule, "skipped", "rosati(Sigma_J) is not integral", p.label, False, p.transposed)
                )
                unsettled.append(p)
        if not integral or integral[0].label != probes[0].label:
            return Status.UNDECIDED, None, {}

    half = idempotent(m, {0}).scale(Fraction(1, 2))
    half_integral = is_integral(m, half)
    steps.append(
        TraceStep(
            "norm",
            "holds" if not half_integral else "violated",
            "1/2 e_K is never integral for proper K, so conv_Delta(Lambda) forces U = V on the diagonal",
            probes[0].label,
            half_integral,
            half,
        )
    )
    if half_integral:
        return Status.UNDECIDED, None, {}

    liverpool = _liverpool_step(m)
    steps.append(liverpool)
    if not liverpool.integral:
        return Status.UNDECIDED, None, {}

    steps.append(
        TraceStep(
            "case1",
            "refuted",
            "a split of the diagonal W cells contradicts W_Lambda in {empty, I}; "
            "by Lambda <-> Xi symmetry every diagonal W cell lies on Lambda",
            probes[0].label,
        )
    )

    if m.g == 2:
        transposition_probe = probes[1]
        if m.mode is Mode.AXIOMATIC:
            steps.append(
                TraceStep(
                    "case2",
                    "undecided",
                    "the only transposition has no fixed point; the off-diagonal split passes both probes",
                    transposition_probe.label,
                )
            )
            return Status.UNDECIDED, None, {}
        if not unsettled:
            unsettled.append(transposition_probe)

    for p in integral[1:] if m.g > 2 else ():
        a, b = (i for i in m.indices if p.sigma[i] != i)
        rules: dict[str, int] = {}
        open_pattern = None
        for pattern in _case2_patterns(a, b, m.g):
            lam = {cell: assignment_coef(assignment) for cell, assignment in pattern.items()}
            status, rule, answer = _probe_outcome(m, p, lam)
            if status is not RefuteStatus.REFUTED:
                open_pattern = (pattern, status, answer)
                break
            rules[rule] = rules.get(rule, 0) + 1
        if open_pattern is not None:
            pattern, status, answer = open_pattern
            cells = ", ".join(f"({i + 1},{j + 1}):{pattern[(i, j)]}" for i, j in ((a, b), (b, a)))
            steps.append(
                TraceStep("case2", status.value.lower(), f"pattern {cells} is not refuted", p.label, answer)
            )
            if m.mode is not Mode.LATTICE:
                return Status.UNDECIDED, None, {}
            unsettled.append(p)
            continue
        by_rule = ", ".join(f"{rule}: {count}" for rule, count in sorted(rules.items()))
        steps.append(
            TraceStep(
                "case2",
                "refuted",
                f"W_Xi at ({a + 1},{b + 1}) or ({b + 1},{a + 1}) makes e_(sigma,W_Xi) non-integral ({by_rule})",
                p.label,
                False,
                p.transposed,
            )
        )

    if unsettled:
        return _residual_search(m, integral, unsettled, steps, threads, progress, max_free_cells)
    return Status.INDECOMPOSABLE, None, {}


# ---- decide ----


def decide(
    m: AbelianModel,
    mode: DecisionMode | str = DecisionMode.PROOFTRACE,
    threads: int | None = None,
    progress: bool | None = None,
    max_free_cells: int | None = None,
) -> Verdict:
    mode = DecisionMode(mode)
    logger.info("Deciding %s (g=%d, %s) in %s mode", m.name or "<anonymous>", m.g, m.mode.value, mode.value)
    steps = _header(m)
    steps.append(_hypothesis_step(m))
    probe_labels = [p.label for p in probes_for(m)]

    witness = None
    stats: dict[str, Any] = {}
    if mode is DecisionMode.EXHAUSTIVE:
        status, witness, stats = _exhaustive(
            m,
            steps,
            config.resolve_threads(threads),
            config.SHOW_PROGRESS if progress is None else progress,
            config.MAX_FREE_CELLS if max_free_cells is None else max_free_cells,
        )
    else:
        status, witness, stats = _prooftrace(
            m,
            steps,
            config.resolve_threads(threads),
            config.SHOW_PROGRESS if progress is None else progress,
            config.MAX_FREE_CELLS if max_free_cells is None else max_free_cells,
        )

    logger.info("Verdict for %s: %s", m.name or "<anonymous>", status.value)
    return Verdict(status, mode, m.name, probe_labels, steps, witness, stats)
