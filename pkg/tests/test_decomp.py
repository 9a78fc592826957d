from fractions import Fraction
from itertools import product

import pytest

from motivix.cmlat import Mode, build_model, full_grid, load_model
from motivix.decomp import (
    ASSIGNMENTS,
    Candidate,
    DecisionMode,
    RefuteStatus,
    Side,
    Status,
    TraceLevel,
    assignment_coef,
    decide,
    eval_probe,
    lattice_probes,
    liverpool_window,
    probe_is_integral,
    probes_for,
    refute,
)
from motivix.errors import CandidateError, HypothesisError, InvalidInput
from tests.conftest import MODELS_DIR


@pytest.fixture(scope="module")
def axiomatic_g3():
    return build_model(1, 3, [], Mode.AXIOMATIC, exponents=[5, 5, 5], name="axiomatic-g3")


def random_candidate(rng, g):
    cells = sorted(full_grid(g))
    while True:
        candidate = Candidate(
            g,
            {c for c in cells if rng.random() < 0.5},
            {c for c in cells if rng.random() < 0.5},
            {c for c in cells if rng.random() < 0.5},
        )
        if candidate.is_nontrivial():
            return candidate


def test_assignment_coefficients():
    assert [assignment_coef(a) for a in ASSIGNMENTS] == [
        Fraction(1),
        Fraction(3, 2),
        Fraction(3, 2),
        Fraction(2),
        Fraction(-1),
        Fraction(-1, 2),
        Fraction(-1, 2),
        Fraction(0),
    ]


def test_candidate_helpers():
    candidate = Candidate(2, {(0, 0)}, set(), {(0, 1)})
    assert candidate.side("u", (0, 0)) is Side.LAMBDA
    assert candidate.side("w", (0, 0)) is Side.XI
    assert candidate.swap().swap() == candidate
    assert candidate.coef((0, 0)) == Fraction(-1, 2)
    assert candidate.coef((0, 1)) == 2
    assert candidate.to_json()["w_lambda"] == [[1, 2]]
    assert candidate.to_json()["sides"]["1,1"] == {"w": "XI", "u": "LAMBDA", "v": "XI"}
    assert candidate.to_json()["sides"]["1,2"] == {"w": "LAMBDA", "u": "XI", "v": "XI"}
    assert not Candidate.full(2).is_nontrivial()
    with pytest.raises(CandidateError):
        Candidate(2, {(0, 2)}, set(), set()).validate(2)


def test_probe_list(g3_model):
    labels = [p.label for p in probes_for(g3_model)]
    assert labels == ["id", "(1 2)", "(1 3)", "(2 3)"]
    assert [p.rule for p in probes_for(g3_model)] == ["case1", "case2", "case2", "case2"]
    assert all(probe_is_integral(g3_model, p) for p in probes_for(g3_model))


def test_transposition_probe_is_not_integral_on_asymmetric_glue(g2_model):
    identity_probe, swap_probe = probes_for(g2_model)
    assert probe_is_integral(g2_model, identity_probe)
    assert not probe_is_integral(g2_model, swap_probe)
    assert len(lattice_probes(g2_model)) == 8


def test_liverpool_window():
    assert liverpool_window([1, 1, 1]) is True
    assert liverpool_window([0, 2]) is False
    assert liverpool_window([0, 1, 3]) is False
    assert liverpool_window([0, 5]) is None


def test_refute_by_the_identity_probe(g2_model):
    refutation = refute(Candidate(2, set(), set(), {(0, 0)}), g2_model)
    assert refutation.status is RefuteStatus.REFUTED
    assert refutation.rule == "case1"
    assert refutation.probe == "id"


def test_refute_by_the_norm_criterion(g2_model):
    refutation = refute(Candidate(2, {(0, 0)}, set(), {(0, 0)}), g2_model)
    assert refutation.status is RefuteStatus.REFUTED
    assert refutation.rule == "norm"


def test_refute_rejects_trivial_candidates(g2_model):
    with pytest.raises(CandidateError):
        refute(Candidate.empty(2), g2_model)
    with pytest.raises(CandidateError):
        refute(Candidate.full(2), g2_model)


def test_refute_checks_the_hypothesis(small_exponent_model):
    with pytest.raises(HypothesisError):
        refute(Candidate(3, set(), set(), {(0, 0)}), small_exponent_model)


def test_refutation_is_symmetric_under_swap(axiomatic_g3, rng):
    for _ in range(1000):
        candidate = random_candidate(rng, 3)
        assert refute(candidate, axiomatic_g3).status is refute(candidate.swap(), axiomatic_g3).status


def test_probe_images_sum_to_the_transposed_probe(g3_model, rng):
    for probe in probes_for(g3_model):
        for _ in range(25):
            lam, xi = eval_probe(random_candidate(rng, 3), probe, g3_model)
            assert lam + xi == probe.transposed


def splice(inside: Candidate, outside: Candidate, cells) -> Candidate:
    cells = set(cells)

    def grid(name):
        return (getattr(inside, name) & cells) | (getattr(outside, name) - cells)

    return Candidate(inside.g, grid("u_lambda"), grid("v_lambda"), grid("w_lambda"))


def test_images_ignore_cells_outside_the_support(g2_model, g3_model, rng):
    for m in (g2_model, g3_model):
        for probe in [*probes_for(m), *lattice_probes(m)]:
            for _ in range(10):
                candidate = random_candidate(rng, m.g)
                moved = splice(candidate, random_candidate(rng, m.g), probe.cells)
                assert eval_probe(moved, probe, m) == eval_probe(candidate, probe, m)


def test_single_factor_is_indecomposable():
    m = build_model(1, 1, name="single")
    assert decide(m, DecisionMode.PROOFTRACE).status is Status.INDECOMPOSABLE


@pytest.mark.parametrize("mode", list(DecisionMode))
def test_g3_lattice_is_indecomposable(g3_model, mode):
    verdict = decide(g3_model, mode, threads=2)
    assert verdict.status is Status.INDECOMPOSABLE
    assert verdict.witness is None


def test_g2_lattice(g2_model):
    exhaustive = decide(g2_model, DecisionMode.EXHAUSTIVE, threads=1)
    assert exhaustive.status is Status.INDECOMPOSABLE
    assert exhaustive.stats["free_cells"] == 2
    assert exhaustive.stats["survivors"] == 0
    assert any(step.outcome == "skipped" and step.probe == "(1 2)" for step in exhaustive.trace)
    verdict = decide(g2_model, DecisionMode.PROOFTRACE, threads=1)
    assert verdict.status is Status.INDECOMPOSABLE
    assert verdict.witness is None
    assert any(step.rule == "lattice" and step.outcome == "enumerated" for step in verdict.trace)
    assert verdict.stats["survivors"] == 0


def test_axiomatic_g2_is_undecided_by_prooftrace():
    m = build_model(1, 2, [], Mode.AXIOMATIC, exponents=[5, 5], name="axiomatic-g2")
    verdict = decide(m, DecisionMode.PROOFTRACE)
    assert verdict.status is Status.UNDECIDED
    assert verdict.trace[-1].outcome == "undecided"


@pytest.mark.parametrize(
    "name",
    [
        pytest.param(path.name, marks=[pytest.mark.slow] if "g4" in path.name else [])
        for path in sorted(MODELS_DIR.glob("*lattice*.json"))
    ],
)
def test_lattice_models_agree_across_modes(name):
    m = load_model(MODELS_DIR / name)
    prooftrace = decide(m, DecisionMode.PROOFTRACE, threads=2)
    exhaustive = decide(m, DecisionMode.EXHAUSTIVE, threads=2)
    assert prooftrace.status is exhaustive.status is Status.INDECOMPOSABLE


def test_c6_instance_is_indecomposable(c6_model):
    verdict = decide(c6_model, DecisionMode.PROOFTRACE)
    assert verdict.status is Status.INDECOMPOSABLE
    rules = {step.rule for step in verdict.trace}
    assert {"reduction", "hypothesis", "norm", "liverpool", "case1", "case2"} <= rules
    assert sum(step.rule == "case2" and step.outcome == "refuted" for step in verdict.trace) == 45


def test_exhaustive_is_limited_to_small_genus(c6_model):
    with pytest.raises(InvalidInput):
        decide(c6_model, DecisionMode.EXHAUSTIVE)


def test_small_exponents_fail_the_hypothesis(models_dir):
    with pytest.raises(HypothesisError):
        decide(load_model(models_dir / "bad-exponents.json"))


def test_verdicts_are_deterministic(g3_model):
    first = decide(g3_model, DecisionMode.EXHAUSTIVE, threads=1).to_json(TraceLevel.FULL)
    second = decide(g3_model, DecisionMode.EXHAUSTIVE, threads=3).to_json(TraceLevel.FULL)
    assert first == second


def test_trace_levels(g3_model):
    verdict = decide(g3_model)
    assert verdict.to_json(TraceLevel.NONE)["steps"] == []
    steps = verdict.to_json("steps")["steps"]
    assert steps and all("query" not in step for step in steps)
    assert any("query" in step for step in verdict.to_json("full")["steps"])
    assert verdict.to_json()["probes"] == ["id", "(1 2)", "(1 3)", "(2 3)"]


def test_exhaustive_free_cell_limit(g2_model):
    verdict = decide(g2_model, DecisionMode.EXHAUSTIVE, max_free_cells=1)
    assert verdict.status is Status.UNDECIDED


def test_every_assignment_pattern_of_a_cell_is_enumerated():
    assert len(set(product((1, 0), repeat=3))) == len(ASSIGNMENTS) == 8
