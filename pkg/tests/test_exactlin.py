"""Tests for integer matrices and normal forms."""
from fractions import Fraction

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from cartankit.core.errors import ShapeError, ValidationError
from cartankit.core.exactlin import (IntMatrix, adjugate, as_int, block_diag, det, elementary_divisors, hnf,
                                     inverse_unimodular, is_unimodular, kernel_basis, kronecker,
                                     ones_plus_identity, parse_rational, rank, rational_inverse,
                                     rational_to_json, snf)


def small_matrices(max_side=4, bound=6):
    return st.integers(1, max_side).flatmap(
        lambda m: st.integers(1, max_side).flatmap(
            lambda n: st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n),
                               min_size=m, max_size=m))).map(IntMatrix.from_rows)


def test_snf_of_ones_plus_identity(ones3):
    assert snf(ones3).diagonal == (1, 1, 4)


def test_snf_of_free_case_cartan(ones3):
    assert snf(ones3.scale(2)).diagonal == (2, 2, 8)


def test_snf_of_zero_matrix():
    form = snf(IntMatrix.zeros(2, 3))
    assert form.diagonal == (0, 0)
    assert form.rank == 0
    assert form.verify(IntMatrix.zeros(2, 3))


def test_snf_rectangular():
    a = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    form = snf(a)
    assert form.diagonal == (2, 6, 12)
    assert form.verify(a)


@hsettings(max_examples=200, deadline=None)
@given(small_matrices())
def test_snf_transforms_are_valid(a):
    form = snf(a)
    assert form.verify(a)
    assert form.left @ a @ form.right == form.diagonal_matrix(a.rows, a.cols)


@hsettings(max_examples=100, deadline=None)
@given(small_matrices())
def test_snf_divisors_multiply_to_determinant(a):
    if not a.is_square or det(a) == 0:
        return
    product = 1
    for d in snf(a).diagonal:
        product *= d
    assert product == abs(det(a))


def test_hnf_is_reduced():
    assert hnf(IntMatrix.from_rows([[2, 4], [1, 3]])) == IntMatrix.from_rows([[1, 1], [0, 2]])


def test_hnf_drops_zero_rows():
    assert hnf(IntMatrix.from_rows([[1, 2], [2, 4]])) == IntMatrix.from_rows([[1, 2]])


def test_kernel_of_rank_one_matrix():
    assert kernel_basis(IntMatrix.from_rows([[1, 2], [2, 4]])) == IntMatrix.from_rows([[2, -1]])


def test_kernel_is_saturated():
    a = IntMatrix.from_rows([[1], [1], [1]])
    basis = kernel_basis(a)
    assert basis.rows == 2
    assert (basis @ a).is_zero()
    assert elementary_divisors(basis) == (1, 1)


def test_kernel_of_invertible_matrix_is_empty():
    basis = kernel_basis(IntMatrix.identity(3))
    assert basis.shape == (0, 3)


@hsettings(max_examples=100, deadline=None)
@given(small_matrices())
def test_kernel_rank(a):
    basis = kernel_basis(a)
    assert basis.rows == a.rows - rank(a)
    if basis.rows:
        assert (basis @ a).is_zero()
        assert all(d == 1 for d in elementary_divisors(basis))


def test_det_and_adjugate():
    a = IntMatrix.from_rows([[1, 2], [3, 4]])
    assert det(a) == -2
    assert adjugate(a) == IntMatrix.from_rows([[4, -2], [-3, 1]])
    assert adjugate(IntMatrix.from_rows([[5]])) == IntMatrix.identity(1)


@hsettings(max_examples=50, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_adjugate_identity(rows):
    a = IntMatrix.from_rows(rows)
    assert a @ adjugate(a) == IntMatrix.identity(a.rows).scale(det(a))


def test_det_needs_square_matrix():
    with pytest.raises(ShapeError):
        det(IntMatrix.from_rows([[1, 2]]))
    with pytest.raises(ShapeError):
        adjugate(IntMatrix.from_rows([[1, 2]]))


def test_kronecker_block_convention():
    a = IntMatrix.from_rows([[1, 2]])
    b = IntMatrix.from_rows([[0, 1], [1, 0]])
    assert kronecker(a, b) == IntMatrix.from_rows([[0, 1, 0, 2], [1, 0, 2, 0]])


def test_block_diag():
    result = block_diag(IntMatrix.from_rows([[1]]), IntMatrix.from_rows([[2, 3], [4, 5]]))
    assert result == IntMatrix.from_rows([[1, 0, 0], [0, 2, 3], [0, 4, 5]])


def test_rational_inverse(ones3):
    inverse = rational_inverse(ones3)
    assert inverse[0][0] == Fraction(3, 4)
    assert inverse[0][1] == Fraction(-1, 4)


def test_rational_inverse_of_singular_matrix():
    with pytest.raises(ValidationError):
        rational_inverse(IntMatrix.from_rows([[1, 2], [2, 4]]))


def test_unimodular_inverse():
    a = IntMatrix.from_rows([[2, 1], [1, 1]])
    assert is_unimodular(a)
    assert inverse_unimodular(a) == IntMatrix.from_rows([[1, -1], [-1, 2]])
    with pytest.raises(ValidationError):
        inverse_unimodular(IntMatrix.from_rows([[2, 0], [0, 1]]))


def test_elementary_divisors_of_e6_type_matrix(library):
    assert elementary_divisors(library.load_matrix("e6_base")) == (1, 1, 1, 1, 1, 7)


def test_ones_plus_identity_offset():
    assert ones_plus_identity(2, 3) == IntMatrix.from_rows([[4, 3], [3, 4]])


def test_matrix_arithmetic():
    a = IntMatrix.from_rows([[1, 2], [3, 4]])
    assert a.transpose() == IntMatrix.from_rows([[1, 3], [2, 4]])
    assert a + a == a.scale(2)
    assert (a - a).is_zero()
    assert a.scale(3).divide_exact(3) == a
    with pytest.raises(ValidationError):
        a.divide_exact(2)


def test_ragged_rows_are_rejected():
    with pytest.raises(ShapeError):
        IntMatrix.from_rows([[1, 2], [3]])


def test_from_list_rejects_non_integral_entries():
    with pytest.raises(ValidationError):
        IntMatrix.from_list([[1, 2.5]])
    with pytest.raises(ValidationError):
        IntMatrix.from_list([[{"num": 1, "den": 2}]])
    with pytest.raises(ValidationError):
        IntMatrix.from_list([])
    assert IntMatrix.from_list([[{"num": 4, "den": 2}]]) == IntMatrix.from_rows([[2]])


def test_rational_literals():
    assert parse_rational({"num": 1, "den": 2}) == Fraction(1, 2)
    assert parse_rational(3) == 3
    assert rational_to_json(Fraction(1, 2)) == {"num": 1, "den": 2}
    assert rational_to_json(Fraction(4, 2)) == 2
    with pytest.raises(ValidationError):
        parse_rational({"num": 1, "den": 0})
    with pytest.raises(ValidationError):
        parse_rational(0.5)
    with pytest.raises(ValidationError):
        as_int(Fraction(1, 3))
