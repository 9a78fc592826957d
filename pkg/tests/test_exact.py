from fractions import Fraction

import pytest

from motivix.errors import InvalidInput, RankError, ShapeError
from motivix.exact import (
    ExactMatrix,
    NfElem,
    QuadInt,
    ZLattice,
    as_rat,
    derealify,
    hnf,
    is_irreducible,
    is_squarefree,
    lattice_contains,
    lattice_coordinates,
    lattice_determinant,
    order_modulo,
    realify,
)
from tests.conftest import random_matrix, random_quad


@pytest.mark.parametrize(
    "raw, expected",
    [
        (3, Fraction(3)),
        ("2/6", Fraction(1, 3)),
        ([4, -6], Fraction(-2, 3)),
        (Fraction(5, 7), Fraction(5, 7)),
    ],
)
def test_as_rat_reads_every_encoding(raw, expected):
    assert as_rat(raw) == expected


@pytest.mark.parametrize("raw", [[1, 0], [1.5, 2], "x", [1, 2, 3]])
def test_as_rat_rejects_bad_input(raw):
    with pytest.raises((InvalidInput, ValueError, ZeroDivisionError)):
        as_rat(raw)


def test_squarefree():
    assert is_squarefree(1) and is_squarefree(3) and is_squarefree(30)
    assert not is_squarefree(4) and not is_squarefree(0) and not is_squarefree(-3)


def test_quadint_arithmetic():
    w = QuadInt(1, 1, 3)
    assert w * w.conj() == QuadInt(4, 0, 3)
    assert w.norm() == 4
    assert QuadInt.sqrt_minus_d(3) * QuadInt.sqrt_minus_d(3) == QuadInt(-3, 0, 3)
    assert (w / w) == QuadInt(1, 0, 3)
    assert 2 - w == QuadInt(1, -1, 3)
    assert str(QuadInt(Fraction(1, 2), -1, 3)) == "1/2 - 1*sqrt(-3)"


def test_quadint_rejects_mixed_fields():
    with pytest.raises(ShapeError):
        QuadInt(1, 1, 3) + QuadInt(1, 1, 1)
    with pytest.raises(ZeroDivisionError):
        QuadInt(1, 0, 1) / QuadInt(0, 0, 1)


def test_quadint_division_inverts_multiplication(rng):
    for _ in range(1000):
        a, b = random_quad(rng, 3), random_quad(rng, 3)
        if b.is_zero():
            continue
        assert (a * b) / b == a


def test_realify_round_trip():
    vector = (QuadInt(1, 2, 1), QuadInt(Fraction(1, 5), 0, 1))
    flat = realify(vector)
    assert flat == (1, 2, Fraction(1, 5), 0)
    assert derealify(flat, 1) == vector


def test_matrix_composition_and_identity(rng):
    for _ in range(50):
        a = random_matrix(rng, 3, 1)
        assert a @ ExactMatrix.identity(3, 1) == a
        assert ExactMatrix.identity(3, 1) @ a == a
        assert (a - a).is_zero()


def test_matrix_composition_is_associative(rng):
    for _ in range(100):
        a, b, c = (random_matrix(rng, 2, 3) for _ in range(3))
        assert (a @ b) @ c == a @ (b @ c)


def test_elementary_matrices_multiply_like_units():
    e01 = ExactMatrix.elementary(3, 0, 1, 1)
    e12 = ExactMatrix.elementary(3, 1, 2, 1)
    assert e01 @ e12 == ExactMatrix.elementary(3, 0, 2, 1)
    assert (e12 @ e01).is_zero()


def test_matrix_shape_errors():
    with pytest.raises(ShapeError):
        ExactMatrix.identity(2, 1) @ ExactMatrix.identity(3, 1)
    with pytest.raises(ShapeError):
        ExactMatrix.from_rows([[1, 2], [3]], 1)


def test_matrix_power_and_diagonal():
    swap = ExactMatrix.from_rows([[0, 1], [1, 0]], 1)
    assert swap**2 == ExactMatrix.identity(2, 1)
    diag = ExactMatrix.diagonal([2, 3], 1)
    assert diag.is_diagonal()
    assert diag.diagonal_entries() == (QuadInt(2, 0, 1), QuadInt(3, 0, 1))
    assert diag.hadamard(swap).is_zero()


def test_matrix_json_uses_pairs():
    payload = ExactMatrix.diagonal([Fraction(1, 2), 1], 3).to_json()
    assert payload["rows"] == 2 and payload["cols"] == 2
    assert payload["entries"][0] == [[1, 2], [0, 1]]


def test_hnf_of_redundant_generators():
    lattice = ZLattice.from_generators([[2, 0], [0, 3], [1, 1]], 2)
    assert lattice.basis == ((1, 0), (0, 1))
    assert lattice_determinant(lattice) == 1


def test_hnf_is_canonical():
    first = ZLattice.from_generators([[2, 1], [0, 3]], 2)
    second = ZLattice.from_generators([[2, 4], [2, 1], [0, 6]], 2)
    assert hnf(first) == hnf(second)
    assert first.basis == ((2, 1), (0, 3))


def test_rank_deficient_generators():
    with pytest.raises(RankError):
        ZLattice.from_generators([[1, 2], [2, 4]], 2)


def test_lattice_coordinates_and_membership():
    lattice = ZLattice.from_generators([[2, 0], [0, 2]], 2)
    assert lattice_coordinates(lattice, [1, 1]) == (Fraction(1, 2), Fraction(1, 2))
    assert not lattice_contains(lattice, [1, 1])
    assert lattice_contains(lattice, [4, -2])
    assert lattice_determinant(lattice) == 4


def test_rational_lattices():
    lattice = ZLattice.from_generators([[1, 0], [0, 1], [Fraction(1, 5), Fraction(2, 5)]], 2)
    assert lattice_determinant(lattice) == Fraction(1, 5)
    assert order_modulo(ZLattice.standard(2), [Fraction(1, 2), Fraction(1, 3)]) == 6
    assert order_modulo(lattice, [Fraction(3, 5), Fraction(1, 5)]) == 1


def test_number_field_elements():
    cbrt4 = NfElem.generator((-4, 0, 0, 1))
    assert cbrt4**3 == NfElem.constant(4, (-4, 0, 0, 1))
    assert (cbrt4 - cbrt4).is_zero()
    assert is_irreducible((1, -1, 1))
    assert not is_irreducible((-1, 0, 1))
