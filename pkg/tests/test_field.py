import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupled_msr.errors import DivisionByZero, PivotSingular, SingularMatrix
from coupled_msr.field import FieldContext, get_field, inverse, peasant_mul, rank, row_reduce, solve

F8 = get_field(8)
F16 = get_field(16)
byte = st.integers(0, 255)
nonzero = st.integers(1, 255)


def test_known_products():
    assert F8.mul(0x02, 0x80) == 0x1D
    assert peasant_mul(0x02, 0x80, 8, 0x11D) == 0x1D
    assert F8.mul(0x53, 0xCA) == peasant_mul(0x53, 0xCA, 8, 0x11D)
    assert F8.mul(0, 0x77) == 0 and F8.mul(1, 0x77) == 0x77


def test_full_table_matches_peasant_oracle():
    a = np.arange(256)
    table = F8.vmul(a[:, None], a[None, :])
    for x in range(0, 256, 7):
        for y in range(256):
            assert table[x, y] == peasant_mul(x, y, 8, 0x11D)


def test_inverse_table_and_zero():
    for a in range(1, 256):
        assert F8.mul(a, F8.inv(a)) == 1
    with pytest.raises(DivisionByZero):
        F8.inv(0)
    with pytest.raises(ZeroDivisionError):
        F8.div(3, 0)


def test_pow_and_generator():
    assert F8.pow(2, 255) == 1
    assert F8.pow(7, 0) == 1
    assert F8.pow(0, 0) == 1 and F8.pow(0, 3) == 0
    assert len({F8.pow(2, i) for i in range(255)}) == 255


def test_sixteen_bit_field():
    assert F16.order == 1 << 16 and F16.dtype == np.uint16
    for a, b in [(0x1234, 0xBEEF), (0x8000, 2), (0xFFFF, 0xFFFF)]:
        assert F16.mul(a, b) == peasant_mul(a, b, 16, 0x1100B)
    arr = np.array([1, 0x8000, 0x1234], dtype=np.uint16)
    assert list(F16.scale(2, arr)) == [F16.mul(2, int(v)) for v in arr]


def test_bad_polynomial_rejected():
    with pytest.raises(ValueError):
        FieldContext(8, 0x11B)  # AES polynomial: 2 is not a generator
    with pytest.raises(ValueError):
        FieldContext(12)


@given(byte, byte, byte)
def test_field_axioms(a, b, c):
    f = F8
    assert f.mul(a, b) == f.mul(b, a)
    assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
    assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)
    assert f.add(a, a) == 0 and f.sub(a, b) == f.add(a, b)


@given(byte, nonzero)
def test_div_roundtrip(a, b):
    assert F8.mul(F8.div(a, b), b) == a


def test_dot_carries_batch_axes():
    rng = np.random.default_rng(0)
    M = F8.random((3, 4), rng)
    v = F8.random((4, 5, 2), rng)
    out = F8.dot(M, v)
    assert out.shape == (3, 5, 2)
    for i in range(3):
        acc = np.zeros((5, 2), dtype=np.uint8)
        for j in range(4):
            acc ^= F8.scale(int(M[i, j]), v[j])
        assert np.array_equal(out[i], acc)


def test_inverse_and_solve():
    rng = np.random.default_rng(1)
    # Vandermonde on distinct points is nonsingular
    pts = [1, 2, 3, 4, 5]
    V = np.array([[F8.pow(x, i) for x in pts] for i in range(5)])
    Vi = inverse(F8, V)
    assert np.array_equal(F8.dot(V, Vi), np.eye(5, dtype=np.uint8))
    b = F8.random((5, 3), rng)
    x = solve(F8, V, b)
    assert np.array_equal(F8.dot(V, x), b)


def test_singular_matrix_raises():
    A = np.array([[1, 2], [2, 4]])  # second row = 2 * first
    assert F8.mul(2, 2) == 4
    with pytest.raises(SingularMatrix):
        inverse(F8, A)
    assert rank(F8, A) == 1


def test_row_reduce_pivots():
    A = np.array([[1, 1, 0, 1], [0, 1, 1, 3]])
    R = row_reduce(F8, A, [2, 3])
    assert np.array_equal(R[:, [2, 3]], np.eye(2, dtype=np.uint8))
    with pytest.raises(PivotSingular):
        row_reduce(F8, np.array([[1, 0], [1, 0]]), [0, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_random_inverse_property(n, seed):
    rng = np.random.default_rng(seed)
    A = F8.random((n, n), rng)
    try:
        Ai = inverse(F8, A)
    except SingularMatrix:
        assert rank(F8, A) < n
        return
    assert rank(F8, A) == n
    assert np.array_equal(F8.dot(Ai, A), np.eye(n, dtype=np.uint8))


def test_dot_on_plain_vectors():
    assert list(F8.dot(np.array([[1, 2], [0, 3]]), np.array([3, 4], dtype=np.uint8))) == [3 ^ 8, F8.mul(3, 4)]
