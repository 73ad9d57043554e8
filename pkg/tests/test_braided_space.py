import itertools
from math import comb

import pytest
from hypothesis import given, strategies as st

from braidkit.braided_space import (
    FreeTensor,
    ModelMismatch,
    NormalElement,
    antipode_block,
    braiding_psi,
    check_braiding_well_defined,
    degree_basis,
    format_tensor,
    multiplication_block,
    normal_form,
    parse_element,
    reduce_tensor,
    relation_generators,
)
from braidkit.linalg import SparseMatrix, kron
from braidkit.models import build_model
from braidkit.scalars import QScalar, q

from conftest import ALL_MODELS
from oracles import quotient_dimension


@pytest.mark.parametrize("name", ALL_MODELS)
def test_dimensions_agree_with_dense_rank(name):
    M = build_model(name)
    for m in range(4 if M.n <= 3 else 3):
        assert degree_basis(M, m).dim == quotient_dimension(M.Rprime, m) == comb(M.n + m - 1, m)


def test_relations_reduce_to_zero(any_model):
    for rel in relation_generators(any_model):
        assert not reduce_tensor(any_model, rel)


def test_gl2_plane_exchange(plane2):
    x0, x1 = NormalElement.generator(plane2, 0), NormalElement.generator(plane2, 1)
    assert x1 * x0 == (x0 * x1).scale(q**-1)


def elements(model, max_degree=2):
    def build(terms):
        out = NormalElement(model)
        for m, k, c in terms:
            k %= degree_basis(model, m).dim
            out = out + NormalElement.basis_element(model, m, k).scale(QScalar.from_laurent({c % 3 - 1: c}))
        return out

    term = st.tuples(st.integers(0, max_degree), st.integers(0, 50), st.integers(-3, 3))
    return st.lists(term, max_size=3).map(build)


@pytest.mark.parametrize("name", ["quantum_plane:3", "q_minkowski_4"])
@given(data=st.data())
def test_multiplication_is_associative_with_unit(name, data):
    M = build_model(name)
    a, b, c = (data.draw(elements(M)) for _ in range(3))
    one = NormalElement.one(M)
    assert (a * b) * c == a * (b * c)
    assert one * a == a == a * one


@given(data=st.data())
def test_parse_format_round_trip(data):
    M = build_model("q_euclidean_4")
    e = data.draw(elements(M, 3))
    assert parse_element(M, str(e)) == e
    assert str(parse_element(M, str(e))) == str(e)


def test_parse_rejects_out_of_range(plane2):
    with pytest.raises(IndexError):
        parse_element(plane2, "x[2]")


def test_models_do_not_mix(plane2, plane3):
    with pytest.raises(ModelMismatch):
        NormalElement.one(plane2) + NormalElement.one(plane3)


def test_free_tensor_checks_indices():
    with pytest.raises(IndexError):
        FreeTensor(2, {(0, 2): 1})
    t = FreeTensor(2, {(0,): 1}) * FreeTensor(2, {(1,): q})
    assert format_tensor(t.terms) == "(q) * x[0]x[1]"


def test_psi_on_generators_is_r(any_model):
    # Psi(x_i (x) x_j) = x_b (x) x_a R^a_i^b_j
    n = any_model.n
    P = braiding_psi(any_model, 1, 1)
    for i, j, a, b in itertools.product(range(n), repeat=4):
        assert P.get(b * n + a, i * n + j) == any_model.R[a, i, b, j]


@pytest.mark.parametrize("m,k", [(1, 2), (2, 1), (2, 2)])
def test_psi_preserves_relations(any_model, m, k):
    check_braiding_well_defined(any_model, m, k)


def _eye(model, m):
    return SparseMatrix.identity(degree_basis(model, m).dim)


@pytest.mark.parametrize("m,mm,k", [(1, 1, 1), (1, 1, 2), (2, 1, 1)])
def test_psi_is_natural_for_products(any_model, m, mm, k):
    # Psi(ab (x) c) = (id (x) mult)(Psi (x) id)(a (x) Psi(b (x) c))
    M = any_model
    lhs = braiding_psi(M, m + mm, k) @ kron(multiplication_block(M, m, mm), _eye(M, k))
    rhs = (kron(_eye(M, k), multiplication_block(M, m, mm))
           @ kron(braiding_psi(M, m, k), _eye(M, mm))
           @ kron(_eye(M, m), braiding_psi(M, mm, k)))
    assert lhs == rhs


@pytest.mark.parametrize("m,k", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_antipode_is_braided_antimultiplicative(any_model, m, k):
    M = any_model
    lhs = antipode_block(M, m + k) @ multiplication_block(M, m, k)
    rhs = multiplication_block(M, k, m) @ braiding_psi(M, m, k) @ kron(antipode_block(M, m), antipode_block(M, k))
    assert lhs == rhs


def test_antipode_on_generators(any_model):
    assert antipode_block(any_model, 1) == SparseMatrix.identity(any_model.n, QScalar(-1))


def test_normal_form_is_idempotent(euclid):
    t = {(3, 2, 1): QScalar(1), (1, 0): q}
    e = normal_form(euclid, t)
    assert normal_form(euclid, e.to_tensor()) == e
