import pytest

from motivix.errors import InvalidInput
from motivix.motcalc import (
    HOST_CANNOT,
    HOST_EQUALITY,
    HOST_POSSIBLE,
    NO_HOST,
    CKProjectorRing,
    Center,
    blowup_chain,
    blowup_increments,
    ck_curve,
    ck_surface,
    cubic_fourfold_motive,
    cubic_rationality_ledger,
    direct_sum,
    elliptic_times_curve,
    hypersurface_ck,
    hypersurface_motive,
    lefschetz,
    primitive_middle_betti,
    product_of_curves,
    projective_space,
    surface_dimensions,
    tensor,
    unit,
    weight_table,
)


def test_curve_motive():
    assert ck_curve(3).dims() == (1, 6, 1)
    assert ck_curve(0).dims() == (1, 0, 1)
    assert str(ck_curve(2)) == "1 + M1(C) + L"


@pytest.mark.parametrize("g", range(1, 21))
def test_product_of_curves_accounting(g):
    accounting = product_of_curves(g)
    assert accounting.transcendental == 2 * g * g
    assert accounting.algebraic == 2 * g * g + 2
    assert accounting.b2 == 4 * g * g + 2
    assert accounting.transcendental + accounting.algebraic == accounting.b2
    assert accounting.total == (2 + 2 * g) ** 2


def test_fermat_sextic_square_has_200_transcendental_dimensions():
    assert product_of_curves(10).transcendental == 200


def test_surfaces():
    assert surface_dimensions(ck_surface(6, 4))["M2tr"] == 2
    assert surface_dimensions(ck_surface(22, 2))["M2tr"] == 20
    assert ck_surface(22, 20, 0).dims() == (1, 0, 22, 0, 1)
    assert ck_surface(2, 1, 1).dims() == (1, 2, 2, 2, 1)
    with pytest.raises(InvalidInput):
        ck_surface(4, 5)


def test_tensor_absorbs_units_and_multiplies_lefschetz():
    assert tensor(unit(), lefschetz(2)) == lefschetz(2)
    assert tensor(lefschetz(1), lefschetz(2)) == lefschetz(3)
    assert tensor(direct_sum([unit(), lefschetz(1)]), lefschetz(1)).dims() == (0, 0, 1, 0, 1)


def test_weight_table():
    assert weight_table(ck_curve(1)) == [
        {"weight": 0, "dim": 1},
        {"weight": 1, "dim": 2},
        {"weight": 2, "dim": 1},
    ]


def test_elliptic_times_curve():
    assert elliptic_times_curve(3) == {"M1xM1": 12, "M2tr": 6, "M2alg_from_M1xM1": 6}
    with pytest.raises(InvalidInput):
        elliptic_times_curve(0)


@pytest.mark.parametrize("n, d, expected", [(4, 3, 23), (2, 4, 22), (1, 3, 2), (2, 3, 7)])
def test_middle_betti_numbers(n, d, expected):
    assert primitive_middle_betti(n, d) + (1 if n % 2 == 0 else 0) == expected


@pytest.mark.parametrize("n, d", [(4, 3), (2, 4), (3, 3), (1, 3)])
def test_hypersurface_projectors(n, d):
    ring = hypersurface_ck(n, d)
    assert ring.verify() == {"idempotent": True, "orthogonal": True, "sums_to_diagonal": True}
    assert sorted(ring.projectors()) == sorted(set(range(0, 2 * n + 1, 2)) | {n})


def test_cubic_fourfold_projector_integrality():
    ring = CKProjectorRing(4, 3)
    flags = ring.integral_projectors(divisible_from=3)
    assert flags["pi_0"] and flags["pi_8"] and flags["pi_2"] and flags["pi_6"]
    assert flags["pi_4"]
    assert not flags["pi_prim"]


def test_cubic_fourfold_motive():
    motive = cubic_fourfold_motive()
    assert motive.dims() == (1, 0, 1, 0, 23, 0, 1, 0, 1)
    assert hypersurface_motive(4, 3).total_dim() == 27


def test_blowup_rows():
    rows = blowup_increments(["point", {"kind": "curve", "genus": 2}, {"kind": "surface", "b2": 6, "rho": 4, "q": 1}])
    assert rows["M0"] == (0, 0, 1, 0, 1, 0, 1, 0, 0)
    assert rows["M1"] == (0, 0, 1, 4, 2, 4, 1, 0, 0)
    assert rows["M2"] == (0, 0, 1, 2, 6, 2, 1, 0, 0)


def test_blowup_chain_of_projective_space():
    blown_up = blowup_chain(projective_space(4), ["point", "point"])
    assert blown_up.dims() == (1, 0, 3, 0, 3, 0, 3, 0, 1)


def test_blowup_center_validation():
    with pytest.raises(InvalidInput):
        Center.parse({"kind": "threefold"})
    with pytest.raises(InvalidInput):
        blowup_chain(projective_space(2), [{"kind": "surface", "b2": 1, "rho": 1}], ambient_dim=2)


def test_cubic_ledger_verdicts():
    ledger = cubic_rationality_ledger([(6, 4, 0), (44, 22, 0), (50, 10, 0)], curves=[2], points=1)
    assert ledger["M4tr_dim"] == 22
    assert [s["verdict"] for s in ledger["surfaces"]] == [HOST_CANNOT, HOST_EQUALITY, HOST_POSSIBLE]
    assert ledger["summary"] == HOST_POSSIBLE
    assert ledger["strict_containment_required"] is True


def test_cubic_ledger_without_hosts():
    ledger = cubic_rationality_ledger([(6, 4, 0)])
    assert ledger["summary"] == NO_HOST
    assert ledger["resolution_dims"] == [1, 0, 2, 0, 7, 0, 2, 0, 1]
