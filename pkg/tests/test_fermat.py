import sympy
import pytest

from motivix import fermat
from motivix.errors import InvalidInput, ReductionError
from motivix.fermat import (
    FERMAT_SEXTIC,
    G1,
    G2,
    PHI1,
    PHI2,
    PHI3,
    Rep,
    cbrt4,
    compose_with_permutation,
    form_rank,
    homogenize,
    morphism_from_json,
    normal_form,
    parse_expression,
    permute_form,
    pullback,
    reduce_rational,
    rep_dimension,
    rep_membership,
    x,
    y,
)


def same_on_sextic(left, right):
    return normal_form(sympy.expand(left - right), FERMAT_SEXTIC, (cbrt4,)) == 0


def test_morphisms_land_on_their_targets():
    for phi in (PHI1, PHI2, PHI3):
        assert phi.source is FERMAT_SEXTIC
    with pytest.raises(InvalidInput):
        fermat.CurveMorphism("bad", x, y)


@pytest.mark.parametrize(
    "phi, expected",
    [
        (PHI1, -2 * x * y**2),
        (PHI2, -(cbrt4**2) * y**3),
        (PHI3, 2 * x * y),
    ],
)
def test_pullback_formulas(phi, expected):
    assert same_on_sextic(pullback(phi).f, expected)


def test_pullback_text():
    assert str(pullback(PHI3)) == "2*x*y * omega"
    assert pullback(PHI1).to_json()["rep"] == "V210"


def test_reduce_rational_recognises_polynomials_on_the_curve():
    assert reduce_rational(FERMAT_SEXTIC, x**2 * y) == x**2 * y
    assert same_on_sextic(reduce_rational(FERMAT_SEXTIC, (x**6 + y**6 + 1 + x * y**2) / 1), x * y**2)


def test_reduce_rational_rejects_non_holomorphic_coefficients():
    with pytest.raises(ReductionError):
        reduce_rational(FERMAT_SEXTIC, 1 / x)


@pytest.mark.parametrize(
    "expr, rep",
    [
        (x * y, Rep.V111),
        (-2 * x * y**2, Rep.V210),
        (x**2 + 3 * y, Rep.V210),
        (y**3, Rep.V300),
        (x**3 - 1, Rep.V300),
        (x**2 + y**3, Rep.NONE),
        (sympy.Integer(0), Rep.NONE),
        (x**4, Rep.NONE),
    ],
)
def test_rep_membership(expr, rep):
    assert rep_membership(expr) is rep


def test_rep_dimensions():
    assert [rep_dimension(r) for r in (Rep.V111, Rep.V210, Rep.V300)] == [1, 6, 3]


def test_homogenize():
    assert homogenize(-2 * x * y**2) == {(1, 2, 0): -2}
    assert homogenize(x * y) == {(1, 1, 1): 1}
    with pytest.raises(InvalidInput):
        homogenize(x**4)


def test_permuted_forms_match_direct_pullbacks():
    for sigma in [(1, 0, 2), (2, 1, 0), (1, 2, 0)]:
        permuted = permute_form(pullback(PHI1), sigma)
        direct = pullback(compose_with_permutation(PHI1, sigma))
        assert same_on_sextic(permuted.f, direct.f)


def test_orbit_ranks():
    base = pullback(PHI1)
    assert form_rank([permute_form(base, sigma) for sigma in G1]) == 6
    cubes = pullback(PHI2)
    assert form_rank([permute_form(cubes, sigma) for sigma in G2]) == 3
    assert form_rank([pullback(PHI3)]) == 1


def test_parse_expression():
    assert parse_expression("x^2 + 3*y") == x**2 + 3 * y
    assert parse_expression("cbrt4*x") == cbrt4 * x
    for bad in ("__import__('os')", "x + z", "1.5*x", "sin(x)"):
        with pytest.raises(InvalidInput):
            parse_expression(bad)


def test_morphism_from_json():
    phi = morphism_from_json({"name": "phi1", "u": "-x^2", "v": "y^3"})
    assert same_on_sextic(pullback(phi).f, -2 * x * y**2)
    with pytest.raises(InvalidInput):
        morphism_from_json({"u": "x"})


@pytest.mark.slow
def test_degrees_are_stable_across_primes():
    assert fermat.degree(PHI1, threads=2) == 6
    assert fermat.degree(PHI3, threads=2) == 4
    assert fermat.degree(PHI2, threads=2) == 12


@pytest.mark.slow
def test_c6_instance_report():
    instance = fermat.build_c6_instance(threads=2)
    metadata = instance.metadata
    assert metadata["dim_M2_tr"] == 200
    assert metadata["rep_dimensions"] == {"V111": 1, "V210": 6, "V300": 3}
    assert metadata["ranks"] == {"G1": 6, "G2": 3, "phi3": 1}
    assert metadata["computed_exponents"] == [6] * 6 + [12] * 3 + [4]
    assert metadata["published_exponents"] == [6] * 6 + [24] * 3 + [4]
    assert instance.model.g == 10
    assert len(instance.to_json()["forms"]) == 10
