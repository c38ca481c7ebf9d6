"""Exact algebra tests against independent 3x3 matrix oracles."""

import numpy as np
import pytest

from heisentube.heisenberg import (
    AlgebraElement,
    ComplexGroupElement,
    GroupElement,
    HaarMeasure,
    IDENTITY,
    embed,
    exp_i,
    factorize,
    inverse,
    left_translate_box,
    mul,
    mul_coords,
    right_translate_box,
    unimodularity_check,
)

TOL = 1e-12


def as_matrix(c):
    c1, c2, c3 = c.coords()
    return np.array([[1, c1, c3], [0, 1, c2], [0, 0, 1]], dtype=complex)


def from_matrix(M, cls=GroupElement):
    vals = (M[0, 1], M[1, 2], M[0, 2])
    if cls is GroupElement:
        return GroupElement(*(v.real for v in vals))
    return ComplexGroupElement(*vals)


def algebra_matrix(theta):
    t1, t2, t3 = theta.coords()
    return np.array([[0, t1, t3], [0, 0, t2], [0, 0, 0]], dtype=float)


def max_coord_diff(a, b):
    return max(abs(x - y) for x, y in zip(a.coords(), b.coords()))


def test_identity_and_mul_examples():
    s = GroupElement(0.3, -1.2, 2.5)
    assert mul(IDENTITY, s) == s
    # (1,0,0)*(0,1,0) against the matrix-product oracle
    a, b = GroupElement(1, 0, 0), GroupElement(0, 1, 0)
    expected = from_matrix(as_matrix(a) @ as_matrix(b))
    got = mul(a, b)
    assert got == GroupElement(1, 1, 1) == expected
    c = GroupElement(1, 2, 3)
    assert max_coord_diff(mul(c, inverse(c)), IDENTITY) < TOL


def test_mul_matches_matrix_oracle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = ComplexGroupElement(*(complex(*rng.uniform(-2, 2, 2)) for _ in range(3)))
        b = ComplexGroupElement(*(complex(*rng.uniform(-2, 2, 2)) for _ in range(3)))
        oracle = from_matrix(as_matrix(a) @ as_matrix(b), ComplexGroupElement)
        assert max_coord_diff(mul(a, b), oracle) < TOL


def test_inverse_examples_and_oracle():
    assert inverse(IDENTITY) == IDENTITY
    oracle = from_matrix(np.linalg.inv(as_matrix(GroupElement(1, 1, 0))))
    assert inverse(GroupElement(1, 1, 0)) == GroupElement(-1, -1, 1)
    assert max_coord_diff(inverse(GroupElement(1, 1, 0)), oracle) < TOL
    for t in (0.7, -3.0):
        assert inverse(GroupElement(t, 0, 0)) == GroupElement(-t, 0, 0)


def test_associativity_randomized():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a, b, c = (GroupElement(*rng.uniform(-2, 2, 3)) for _ in range(3))
        lhs = mul(mul(a, b), c)
        rhs = mul(a, mul(b, c))
        assert max_coord_diff(lhs, rhs) < TOL


def test_mixed_mul_rejected():
    with pytest.raises(TypeError):
        mul(GroupElement(1, 0, 0), ComplexGroupElement(1, 0, 0))


def test_exp_examples():
    assert exp_i(AlgebraElement(0, 0, 0)) == ComplexGroupElement(0, 0, 0)
    e = exp_i(AlgebraElement(1, 1, 0))
    assert e == ComplexGroupElement(1j, 1j, -0.5)
    assert exp_i(AlgebraElement(0, 0, 1)) == ComplexGroupElement(0, 0, 1j)


def test_exp_equals_matrix_series_exactly():
    # the 6-term partial sum of expm(i*Theta); terms beyond the square vanish
    rng = np.random.default_rng(2)
    for _ in range(200):
        th = AlgebraElement(*rng.uniform(-2, 2, 3))
        A = 1j * algebra_matrix(th)
        series = np.eye(3, dtype=complex)
        term = np.eye(3, dtype=complex)
        for k in range(1, 6):
            term = term @ A / k
            series = series + term
        got = as_matrix(exp_i(th))
        assert np.array_equal(got, series)


def test_algebra_nilpotence():
    A = algebra_matrix(AlgebraElement(3.0, -2.0, 7.0))
    assert np.all(A @ A @ A == 0)


def test_factorize_examples():
    th, t = factorize(ComplexGroupElement(0, 0, 0))
    assert th == AlgebraElement(0, 0, 0) and t == IDENTITY
    th, t = factorize(ComplexGroupElement(1j, 0, 0))
    assert th == AlgebraElement(1, 0, 0) and t == IDENTITY
    # Z = (0, 1, i): multiply exp_i(-Theta) * Z with the mul oracle
    Z = ComplexGroupElement(0, 1, 1j)
    th, t = factorize(Z)
    assert th == AlgebraElement(0, 0, 1)
    oracle = from_matrix(
        np.linalg.inv(as_matrix(exp_i(th))) @ as_matrix(Z), ComplexGroupElement
    )
    assert max_coord_diff(embed(t), oracle) < TOL
    assert t == GroupElement(0, 1, 0)


def test_factorize_roundtrip_randomized():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        Z = ComplexGroupElement(*(complex(*rng.uniform(-2, 2, 2)) for _ in range(3)))
        th, t = factorize(Z)
        recon = mul(exp_i(th), embed(t))
        assert max_coord_diff(recon, Z) < TOL


def test_embedding_is_homomorphism():
    rng = np.random.default_rng(4)
    for _ in range(200):
        a = GroupElement(*rng.uniform(-2, 2, 3))
        b = GroupElement(*rng.uniform(-2, 2, 3))
        assert embed(mul(a, b)) == mul(embed(a), embed(b))


def test_translate_boxes_contain_images():
    rng = np.random.default_rng(5)
    box = ((-1.0, 1.0), (-0.5, 1.5), (-2.0, 0.5))
    s = GroupElement(1.7, -2.3, 0.4)
    pts = np.column_stack(
        [rng.uniform(lo, hi, 500) for lo, hi in box]
    )
    right = np.stack(mul_coords(pts[:, 0], pts[:, 1], pts[:, 2], s.t1, s.t2, s.t3), axis=1)
    left = np.stack(mul_coords(s.t1, s.t2, s.t3, pts[:, 0], pts[:, 1], pts[:, 2]), axis=1)
    for img, tbox in ((right, right_translate_box(box, s)), (left, left_translate_box(box, s))):
        for k, (lo, hi) in enumerate(tbox):
            assert np.all(img[:, k] >= lo - 1e-12)
            assert np.all(img[:, k] <= hi + 1e-12)


def test_unimodularity_check():
    box = ((0.0, 1.0),) * 3
    assert unimodularity_check(box, IDENTITY, samples=10_000, seed=0) == 0.0
    assert unimodularity_check(box, GroupElement(1, 0, 0), samples=1_000_000, seed=0) < 1e-2
    assert unimodularity_check(box, GroupElement(0, 1, 0), samples=1_000_000, seed=1) < 1e-2


def test_unimodularity_check_rejections():
    with pytest.raises(ValueError):
        unimodularity_check(((0, 0), (0, 1), (0, 1)), IDENTITY, samples=10_000)
    with pytest.raises(ValueError):
        unimodularity_check(((0, 1),) * 3, IDENTITY, samples=10)


def test_haar_measure_volume():
    mu = HaarMeasure()
    assert mu.box_volume(((0, 2), (0, 3), (-1, 1))) == 12.0
