import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zigzag.exceptions import DimensionError, FieldError, SingularMatrixError
from zigzag.field import FMatrix, det, field_new, rank, solve_linear, solve_system

ORDERS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 256]


def test_gf3_two_squared_is_one():
    f = field_new(3)
    assert f.mul(2, 2) == 1


def test_gf4_primitive_satisfies_its_polynomial():
    f = field_new(4)
    c = f.primitive
    assert f.mul(c, c) == f.add(c, 1)


@pytest.mark.parametrize("q", [6, 10, 12, 0, 1, 257, 512])
def test_rejects_non_prime_powers_and_large_orders(q):
    with pytest.raises(FieldError):
        field_new(q)


def test_field_is_cached():
    assert field_new(16) is field_new(16)


@pytest.mark.parametrize("q", ORDERS)
def test_field_axioms(q):
    f = field_new(q)
    a = np.arange(q)
    A, B = np.meshgrid(a, a, indexing="ij")
    assert np.array_equal(f.add(A, B), f.add(B, A))
    assert np.array_equal(f.mul(A, B), f.mul(B, A))
    assert np.all(f.add(a, f.neg(a)) == 0)
    nz = a[1:]
    assert np.all(f.mul(nz, f.inv(nz)) == 1)
    # every nonzero element is a power of the primitive element
    powers = {f.pow(f.primitive, n) for n in range(q - 1)}
    assert powers == set(range(1, q))
    assert f.order(f.primitive) == q - 1


@pytest.mark.parametrize("q", [4, 8, 9, 16])
def test_distributivity(q):
    f = field_new(q)
    a = np.arange(q)
    A, B, C = np.meshgrid(a, a, a, indexing="ij")
    assert np.array_equal(f.mul(A, f.add(B, C)), f.add(f.mul(A, B), f.mul(A, C)))


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        field_new(5).inv(0)


def test_pow_edge_cases():
    f = field_new(7)
    assert f.pow(0, 0) == 1
    assert f.pow(0, 3) == 0
    assert f.pow(3, 6) == 1


def test_solve_identity_returns_rhs():
    f = field_new(5)
    b = np.array([1, 4, 2])
    assert np.array_equal(solve_linear(FMatrix.identity(f, 3), b), b)


def test_solve_small_gf3_system():
    f = field_new(3)
    x = solve_linear(FMatrix(f, [[1, 1], [1, 2]]), [0, 1])
    assert x.tolist() == [2, 1]


def test_solve_equal_rows_is_singular():
    f = field_new(3)
    with pytest.raises(SingularMatrixError):
        solve_linear(FMatrix(f, [[1, 2], [1, 2]]), [0, 1])


def test_solve_shape_errors():
    f = field_new(3)
    with pytest.raises(DimensionError):
        solve_linear(FMatrix(f, [[1, 2, 0], [1, 1, 1]]), [0, 1])
    with pytest.raises(DimensionError):
        FMatrix(f, [1, 2, 3])
    with pytest.raises(FieldError):
        FMatrix(f, [[3]])


def test_overdetermined_consistent_and_inconsistent():
    f = field_new(5)
    a = np.array([[1, 0], [0, 1], [1, 1]])
    assert solve_system(f, a, [2, 3, 0]).tolist() == [2, 3]
    with pytest.raises(SingularMatrixError):
        solve_system(f, a, [2, 3, 1])


def test_determinants():
    f = field_new(3)
    assert det(FMatrix.identity(f, 4)) == 1
    assert det(FMatrix(f, [[2, 0], [0, 2]])) == 1
    assert det(FMatrix(f, [[1, 2], [0, 0]])) == 0
    assert det(FMatrix(f, [[0, 1], [1, 0]])) == f.neg(1)
    with pytest.raises(DimensionError):
        det(FMatrix(f, [[1, 2]]))


def test_rank():
    f = field_new(2)
    assert rank(f, [[1, 1, 0], [0, 1, 1], [1, 0, 1]]) == 2
    assert rank(f, np.zeros((0, 3), dtype=np.int64)) == 0


def test_matmul_operator():
    f = field_new(4)
    a = FMatrix(f, [[1, 2], [3, 1]])
    assert a @ FMatrix.identity(f, 2) == a
    assert (a @ np.array([1, 0])).tolist() == [1, 3]


@settings(max_examples=60, deadline=None)
@given(q=st.sampled_from([3, 4, 5, 7, 8, 16]), n=st.integers(1, 5), seed=st.integers(0, 10**6))
def test_solve_round_trip(q, n, seed):
    f = field_new(q)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, q, size=(n, n))
    x = rng.integers(0, q, size=n)
    b = FMatrix(f, a) @ x
    if det(FMatrix(f, a)) == 0:
        with pytest.raises(SingularMatrixError):
            solve_linear(FMatrix(f, a), b)
    else:
        assert np.array_equal(solve_linear(FMatrix(f, a), b), x)


@settings(max_examples=40, deadline=None)
@given(q=st.sampled_from([3, 4, 5, 8, 9]), seed=st.integers(0, 10**6))
def test_det_is_multiplicative(q, seed):
    f = field_new(q)
    rng = np.random.default_rng(seed)
    a = FMatrix(f, rng.integers(0, q, size=(3, 3)))
    b = FMatrix(f, rng.integers(0, q, size=(3, 3)))
    assert det(a @ b) == f.mul(det(a), det(b))
