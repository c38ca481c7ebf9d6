"""Gauge values, invariance, derivative bundles vs the finite-difference oracle."""

import numpy as np
import pytest

from heisentube.gauge import (
    GaugeModel,
    TubePoint,
    derivatives,
    fd_bundle,
    phi,
    phi_coords,
    phi_tilde,
    project_to_group,
    rescaled_model,
    translate,
    tube_contains,
)
from heisentube.heisenberg import (
    ComplexGroupElement,
    GroupElement,
    embed,
    mul,
    mul_coords,
)


def random_complex_points(rng, count, scale=1.5):
    v = rng.uniform(-scale, scale, (count, 6))
    return np.stack([v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3], v[:, 4] + 1j * v[:, 5]], axis=1)


def test_phi_examples():
    assert phi(ComplexGroupElement(0.7, -1.3, 2.0)) == 0.0
    assert phi(ComplexGroupElement(0, 1, 1j)) == 1.0
    assert phi(ComplexGroupElement(1j, 0, 0)) == 1.0


def test_phi_matches_trace_form():
    rng = np.random.default_rng(0)
    zs = random_complex_points(rng, 10_000)
    n = len(zs)
    X = np.tile(np.eye(3), (n, 1, 1))
    Y = np.zeros((n, 3, 3))
    X[:, 0, 1], X[:, 1, 2], X[:, 0, 2] = np.real(zs).T
    Y[:, 0, 1], Y[:, 1, 2], Y[:, 0, 2] = np.imag(zs).T
    A = Y @ np.linalg.inv(X)
    trace_form = np.sum(A**2, axis=(1, 2))
    closed = phi_coords(zs[:, 0], zs[:, 1], zs[:, 2])
    assert np.max(np.abs(trace_form - closed)) < 1e-12


def test_phi_right_invariance():
    rng = np.random.default_rng(1)
    zs = random_complex_points(rng, 10_000)
    ts = rng.uniform(-1.5, 1.5, (10_000, 3))
    zt = np.stack(mul_coords(zs[:, 0], zs[:, 1], zs[:, 2], ts[:, 0], ts[:, 1], ts[:, 2]), axis=1)
    diff = np.abs(
        phi_coords(zt[:, 0], zt[:, 1], zt[:, 2]) - phi_coords(zs[:, 0], zs[:, 1], zs[:, 2])
    )
    assert np.max(diff) < 1e-10


def test_phi_nonnegative_and_zero_on_group():
    rng = np.random.default_rng(2)
    zs = random_complex_points(rng, 2000)
    assert np.all(phi_coords(zs[:, 0], zs[:, 1], zs[:, 2]) >= 0)
    for _ in range(100):
        t = GroupElement(*rng.uniform(-3, 3, 3))
        assert phi(embed(t)) == 0.0


def test_phi_tilde_examples():
    real = ComplexGroupElement(0.4, 0.5, 0.6)
    assert phi_tilde(TubePoint(0.3, real)) == 0.0
    assert phi_tilde(TubePoint(0.3j, real)) == pytest.approx(0.09, abs=1e-15)
    assert phi_tilde(TubePoint(0.3j, ComplexGroupElement(0, 1, 1j))) == pytest.approx(1.09, abs=1e-15)


def test_tubepoint_normalizes_cylinder_coordinate():
    p = TubePoint(2.75 + 0.5j, ComplexGroupElement())
    assert p.z0 == 0.75 + 0.5j
    q = TubePoint(-0.25, ComplexGroupElement())
    assert q.z0 == 0.75


def test_tube_contains():
    eps = 0.04
    real = TubePoint(0.0, ComplexGroupElement(1.0, 2.0, 3.0))
    assert tube_contains(real, eps) == "inside"
    boundary = TubePoint(1j * np.sqrt(eps), ComplexGroupElement())
    assert tube_contains(boundary, eps) == "boundary"
    outside = TubePoint(2j * np.sqrt(eps), ComplexGroupElement())
    assert tube_contains(outside, eps) == "outside"
    with pytest.raises(ValueError):
        tube_contains(real, 0.0)


def test_abelian_bundle_at_origin():
    model = GaugeModel.abelian(3)
    b = model.bundle(np.zeros(3, dtype=complex))
    assert b.value == 0.0
    assert np.allclose(b.grad, 0.0, atol=1e-15)
    assert np.allclose(b.mixed_hessian, 0.5 * np.eye(3), atol=1e-14)
    assert np.allclose(b.holo_hessian, -0.5 * np.eye(3), atol=1e-14)


def test_phi_gradient_vanishes_on_group():
    model = GaugeModel.heisenberg()
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = rng.uniform(-2, 2, 3).astype(complex)
        b = model.bundle(t)
        assert np.max(np.abs(b.grad)) < 1e-14


def test_phi_tilde_mixed_hessian_at_origin():
    model = GaugeModel.thickened(0.1)
    b = model.bundle(np.zeros(4, dtype=complex))
    assert np.allclose(b.mixed_hessian, 0.5 * np.eye(4), atol=1e-14)


def test_bundle_hermitian_and_symmetric():
    rng = np.random.default_rng(4)
    model = GaugeModel.thickened(0.1)
    pts = rng.uniform(-0.7, 0.7, (200, 8))
    z = pts[:, :4] + 1j * pts[:, 4:]
    _, _, holo, mixed = model.bundle_batch(z)
    assert np.max(np.abs(holo - np.transpose(holo, (0, 2, 1)))) < 1e-10
    assert np.max(np.abs(mixed - np.conj(np.transpose(mixed, (0, 2, 1))))) < 1e-10


@pytest.mark.parametrize(
    "model",
    [
        GaugeModel.heisenberg(),
        GaugeModel.thickened(0.1),
        GaugeModel.abelian(2, 0.05),
        rescaled_model(GaugeModel.thickened(0.1), 2.0),
    ],
    ids=["phi", "phi-tilde", "abelian", "rescaled"],
)
def test_analytic_vs_finite_difference(model):
    rng = np.random.default_rng(5)
    for _ in range(5):
        v = rng.uniform(-0.4, 0.4, 2 * model.n)
        z = v[: model.n] + 1j * v[model.n :]
        analytic = derivatives(model, z)
        fd = fd_bundle(model, z, h=1e-4)
        assert abs(analytic.value - fd.value) < 1e-12
        assert np.max(np.abs(analytic.grad - fd.grad)) < 1e-7
        assert np.max(np.abs(analytic.holo_hessian - fd.holo_hessian)) < 1e-5
        assert np.max(np.abs(analytic.mixed_hessian - fd.mixed_hessian)) < 1e-5


def test_finite_difference_richardson_ratio():
    # truncation-dominated steps: halving h should shrink errors ~4x.  The
    # polynomial gauges are differentiated exactly by central stencils (no
    # power above 2 per variable), so the genuinely transcendental rescaled
    # model is the one that exposes the O(h^2) truncation law.
    model = rescaled_model(GaugeModel.thickened(0.1), 2.0)
    z = np.array([0.21 + 0.13j, -0.3 + 0.27j, 0.4 - 0.11j, 0.12 + 0.3j])
    exact = derivatives(model, z)

    def hess_err(h):
        fd = fd_bundle(model, z, h=h)
        return np.max(np.abs(fd.mixed_hessian - exact.mixed_hessian))

    e1, e2, e3 = hess_err(2e-2), hess_err(1e-2), hess_err(5e-3)
    assert 3.0 < e1 / e2 < 5.0
    assert 3.0 < e2 / e3 < 5.0


def test_rescaled_model():
    base = GaugeModel.thickened(0.1)
    model = rescaled_model(base, 3.0)
    with pytest.raises(ValueError):
        rescaled_model(base, 0.0)
    rng = np.random.default_rng(6)
    # zero set unchanged: boundary points of the base are zeros of the rescaled rho
    pts = base.boundary_samples(100, rng)
    assert np.max(np.abs(model.defining_value(pts))) < 1e-9
    # chain-rule mixed Hessian lam*e^(lam*rho)*(m + lam*g*conj(g)) against base
    v = rng.uniform(-0.3, 0.3, 8)
    z = v[:4] + 1j * v[4:]
    val, g, _, m = base.bundle_batch(z[None, :])
    scale = 3.0 * np.exp(3.0 * val[0])
    expected = scale * (m[0] + 3.0 * np.outer(g[0], np.conj(g[0])))
    got = model.bundle(z).mixed_hessian
    assert np.max(np.abs(got - expected)) < 1e-12


def test_boundary_samples_lie_on_boundary():
    rng = np.random.default_rng(7)
    for model in (
        GaugeModel.thickened(0.1),
        GaugeModel.heisenberg(0.2),
        GaugeModel.abelian(3, 0.3),
    ):
        pts = model.boundary_samples(500, rng)
        resid = np.max(np.abs(model.defining_value(pts)))
        assert resid < 1e-9 * max(model.epsilon, 1.0)


def test_projection_examples_and_equivariance():
    p = TubePoint(0.2, ComplexGroupElement(0.5, -0.3, 1.25))
    t = project_to_group(p)
    assert (t.t1, t.t2, t.t3) == (0.5, -0.3, 1.25)
    assert project_to_group(TubePoint(0.1j, ComplexGroupElement(0, 1, 1j))) == GroupElement(0, 1, 0)
    rng = np.random.default_rng(8)
    for _ in range(1000):
        v = rng.uniform(-1, 1, 6)
        p = TubePoint(
            complex(rng.uniform(0, 1), rng.uniform(-0.2, 0.2)),
            ComplexGroupElement(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5])),
        )
        s = GroupElement(*rng.uniform(-1, 1, 3))
        lhs = project_to_group(translate(p, s))
        rhs = mul(project_to_group(p), s)
        assert max(abs(a - b) for a, b in zip(lhs.coords(), rhs.coords())) < 1e-12
