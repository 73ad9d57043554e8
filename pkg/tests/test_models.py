import json

import pytest

from braidkit.models import ModelValidationError, UnknownModel, build_model, gl_seed, load_model, model_names
from braidkit.operators import check_well_defined, derivative_op
from braidkit.rmatrix import RMatrix, flip
from braidkit.scalars import q
from braidkit.spinor import GENERATORS, small_generator_op


def test_catalog():
    assert model_names() == ["q_euclidean_4", "q_minkowski_4", "quantum_plane:2", "quantum_plane:3"]
    with pytest.raises(UnknownModel):
        build_model("quantum_plane:4")


def test_shared_and_fresh_instances():
    a = build_model("quantum_plane:2")
    assert build_model("quantum_plane:2") is a
    assert build_model("quantum_plane:2", fresh=True) is not a


def test_plane_data(plane2, plane3):
    assert plane2.Rprime == plane2.R.scale(q**-2)
    assert plane2.star_type == "I" and plane2.lam is None
    assert plane3.eta is None and plane3.star_type is None
    assert plane3.theta.lambda_nu == q**-4


def test_matrix_models_share_theta(euclid, mink):
    assert euclid.theta.v == mink.theta.v
    assert euclid.theta.u == mink.theta.u
    assert euclid.lam == mink.lam == q**-1


def test_star_types(euclid, mink):
    assert euclid.star_type == "I" and euclid.bar is None
    # Hermitian conjugation swaps the off-diagonal entries b and c
    assert mink.star_type == "II" and mink.bar == (0, 2, 1, 3)


def test_json_summary(mink):
    obj = mink.to_json_obj()
    assert obj["lambda_nu"] == "q^-4"
    assert obj["layout"] == "minkowski"
    json.dumps(obj, sort_keys=True)


def test_load_model_reproduces_the_plane(plane2):
    text = json.dumps({"R": plane2.R.to_json_obj(), "name": "copy"})
    M = load_model(text)
    assert M.name == "copy"
    assert M.Rprime == plane2.Rprime
    for i in range(2):
        assert derivative_op(M, i).block(3).matrix() == derivative_op(plane2, i).block(3).matrix()


def test_load_bare_rmatrix():
    M = load_model(gl_seed(3).dumps())
    assert M.n == 3 and M.eta is None


def test_load_rejects_non_solutions():
    bad = RMatrix.from_entries(2, {(0, 0, 0, 0): 1, (0, 0, 1, 1): 1, (1, 1, 1, 1): q, (0, 1, 1, 0): 1,
                                   (1, 0, 0, 1): 1})
    with pytest.raises(ModelValidationError):
        load_model(bad.dumps())


def test_load_needs_hecke_for_default_rprime():
    with pytest.raises(ModelValidationError):
        load_model(flip(2).dumps())


@pytest.mark.parametrize("g", GENERATORS)
def test_spinor_generators_are_well_defined(four_dim, g):
    for i in range(2):
        for j in range(2):
            op = small_generator_op(four_dim, g, i, j)
            check_well_defined(op, 2)
            check_well_defined(op, 3)


def test_spinor_copies_commute(four_dim):
    L = small_generator_op(four_dim, "L+", 0, 1)
    Mm = small_generator_op(four_dim, "M-", 1, 0)
    assert (L @ Mm - Mm @ L).block(2).is_zero()


def test_spinor_needs_matrix_layout(plane2):
    with pytest.raises(IndexError):
        small_generator_op(plane2, "L+", 0, 0)
    with pytest.raises(ValueError):
        small_generator_op(build_model("q_euclidean_4"), "N+", 0, 0)
