"""Invariant gauges, the thickened gauge, tubes and their derivative bundles.

The gauge on the complexified group is

    phi(Z) = (Im z1)^2 + (Im z2)^2 + (Im z3 - Re z2 * Im z1)^2,

which vanishes exactly on the real group and is invariant under right
translation by real elements.  The thickened gauge adds a cylinder factor:
phi_tilde(z0, Z) = (Im z0)^2 + phi(Z) with Re z0 taken mod 1.

A :class:`GaugeModel` bundles a defining function rho (gauge minus the
tube radius, or exp(lam*rho)-1 for rescaled models) together with its
exact complex gradient, holomorphic Hessian and mixed Hessian.  The
analytic derivatives come from formal Wirtinger differentiation of the
gauge polynomial; :func:`fd_bundle` is the independent finite-difference
oracle used to cross-check them.
"""

from dataclasses import dataclass, replace

import numpy as np

from ._zpoly import ZPoly
from .heisenberg import (
    ComplexGroupElement,
    GroupElement,
    exp_i_coords,
    factorize,
    mul_coords,
)

__all__ = [
    "TubePoint",
    "DerivativeBundle",
    "GaugeModel",
    "phi",
    "phi_coords",
    "phi_tilde",
    "phi_tilde_coords",
    "tube_contains",
    "derivatives",
    "fd_bundle",
    "rescaled_model",
    "project_to_group",
    "translate",
    "BOUNDARY_RTOL",
]

# relative width of the boundary classification band
BOUNDARY_RTOL = 1e-9


def phi_coords(z1, z2, z3):
    y1 = np.imag(z1)
    y2 = np.imag(z2)
    u = np.imag(z3) - np.real(z2) * y1
    return y1 * y1 + y2 * y2 + u * u


def phi(Z):
    """Gauge value of a complex group element (0 exactly on the real group)."""
    return float(phi_coords(Z.z1, Z.z2, Z.z3))


def phi_tilde_coords(z0, z1, z2, z3):
    y0 = np.imag(z0)
    return y0 * y0 + phi_coords(z1, z2, z3)


@dataclass(frozen=True)
class TubePoint:
    """Point of the thickened complexification: cylinder coordinate + group point.

    Re z0 is normalized into [0, 1) on construction; the gauge only sees
    Im z0, so the representative choice is immaterial.
    """

    z0: complex
    Z: ComplexGroupElement

    def __post_init__(self):
        z0 = complex(self.z0)
        object.__setattr__(self, "z0", complex(z0.real % 1.0, z0.imag))

    def coords(self):
        return (self.z0,) + self.Z.coords()


def translate(p, s):
    """Right action of a real group element: (z0, Z) -> (z0, Z*s)."""
    zs = mul_coords(*p.Z.coords(), complex(s.t1), complex(s.t2), complex(s.t3))
    return TubePoint(p.z0, ComplexGroupElement(*zs))


def phi_tilde(p):
    return float(phi_tilde_coords(*p.coords()))


def tube_contains(p, epsilon, rtol=BOUNDARY_RTOL):
    """Classify a point against the tube {phi_tilde < epsilon}.

    Returns "inside", "boundary" or "outside"; the boundary band has
    relative width rtol*epsilon so rescaling the tube radius does not
    silently reclassify points.
    """
    if epsilon <= 0:
        raise ValueError("tube radius must be positive")
    gap = phi_tilde(p) - epsilon
    if abs(gap) <= rtol * epsilon:
        return "boundary"
    return "inside" if gap < 0 else "outside"


def project_to_group(p):
    """Equivariant projection of a tube point onto the real group."""
    _, t = factorize(p.Z)
    return t


# ----------------------------------------------------------------------
# derivative bundles


@dataclass
class DerivativeBundle:
    """Value and complex derivatives of a defining function at one point."""

    value: float
    grad: np.ndarray          # (n,)   d rho / d z_k
    holo_hessian: np.ndarray  # (n,n)  d^2 rho / d z_j d z_k (symmetric)
    mixed_hessian: np.ndarray  # (n,n) d^2 rho / d z_j d conj(z_k) (Hermitian)


def _phi_poly():
    y1 = ZPoly.im(3, 0)
    y2 = ZPoly.im(3, 1)
    y3 = ZPoly.im(3, 2)
    x2 = ZPoly.re(3, 1)
    u = y3 - x2 * y1
    return y1 * y1 + y2 * y2 + u * u


def _phi_tilde_poly():
    y0 = ZPoly.im(4, 0)
    y1 = ZPoly.im(4, 1)
    y2 = ZPoly.im(4, 2)
    y3 = ZPoly.im(4, 3)
    x2 = ZPoly.re(4, 2)
    u = y3 - x2 * y1
    return y0 * y0 + y1 * y1 + y2 * y2 + u * u


def _abelian_poly(n):
    out = ZPoly.constant(n, 0.0)
    for k in range(n):
        yk = ZPoly.im(n, k)
        out = out + yk * yk
    return out


_DERIV_CACHE = {}


def _deriv_polys(kind, n):
    key = (kind, n)
    if key not in _DERIV_CACHE:
        if kind == "heisenberg-phi":
            poly = _phi_poly()
        elif kind == "thickened-phi-tilde":
            poly = _phi_tilde_poly()
        elif kind == "abelian":
            poly = _abelian_poly(n)
        else:
            raise ValueError(f"no polynomial gauge for kind {kind!r}")
        grads = [poly.diff_z(k) for k in range(n)]
        holo = [[grads[j].diff_z(k) for k in range(n)] for j in range(n)]
        mixed = [[grads[j].diff_zbar(k) for k in range(n)] for j in range(n)]
        _DERIV_CACHE[key] = (poly, grads, holo, mixed)
    return _DERIV_CACHE[key]


def _sphere(rng, count, dim):
    v = rng.standard_normal((count, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return v / norms


def _box_samples(rng, count, box):
    lo = np.array([l for l, _ in box])
    hi = np.array([h for _, h in box])
    return lo + rng.random((count, len(box))) * (hi - lo)


@dataclass(frozen=True)
class GaugeModel:
    """A defining-function bundle for one chart.

    kind is one of "heisenberg-phi" (n=3), "thickened-phi-tilde" (n=4),
    "abelian" (any n) or "rescaled".  The defining function is
    gauge - epsilon for the base kinds and expm1(lam * rho_base) for
    rescaled models; the zero set is unchanged by rescaling.
    """

    kind: str
    n: int
    epsilon: float = 0.0
    lam: float = 0.0
    base: "GaugeModel | None" = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def heisenberg(cls, epsilon=0.0):
        return cls("heisenberg-phi", 3, float(epsilon))

    @classmethod
    def thickened(cls, epsilon):
        return cls("thickened-phi-tilde", 4, float(epsilon))

    @classmethod
    def abelian(cls, n, epsilon=0.0):
        return cls("abelian", int(n), float(epsilon))

    def with_epsilon(self, epsilon):
        if self.kind == "rescaled":
            raise ValueError("set the radius on the base model before rescaling")
        return replace(self, epsilon=float(epsilon))

    # -- evaluation -------------------------------------------------------
    def coords(self, point):
        """Coerce a point of this chart to a complex coordinate vector."""
        if isinstance(point, TubePoint):
            arr = np.array(point.coords(), dtype=complex)
        elif isinstance(point, ComplexGroupElement):
            arr = np.array(point.coords(), dtype=complex)
        elif isinstance(point, GroupElement):
            arr = np.array(point.coords(), dtype=complex)
        else:
            arr = np.asarray(point, dtype=complex)
        if arr.shape[-1] != self.n:
            raise ValueError(f"model expects {self.n} coordinates, got {arr.shape[-1]}")
        return arr

    def gauge_value(self, pts):
        """The nonnegative gauge (before subtracting the radius)."""
        z = self.coords(pts)
        if self.kind == "rescaled":
            return self.base.gauge_value(z)
        zz = z if z.ndim > 1 else z[None, :]
        if self.kind == "heisenberg-phi":
            out = phi_coords(zz[..., 0], zz[..., 1], zz[..., 2])
        elif self.kind == "thickened-phi-tilde":
            out = phi_tilde_coords(zz[..., 0], zz[..., 1], zz[..., 2], zz[..., 3])
        elif self.kind == "abelian":
            out = np.sum(np.imag(zz) ** 2, axis=-1)
        else:
            raise ValueError(f"unknown kind {self.kind!r}")
        return out if z.ndim > 1 else float(out[0])

    def defining_value(self, pts):
        """rho: negative inside the tube, zero on its boundary."""
        if self.kind == "rescaled":
            return np.expm1(self.lam * self.base.defining_value(pts))
        return self.gauge_value(pts) - self.epsilon

    # -- derivative bundles -----------------------------------------------
    def bundle_batch(self, pts):
        """(values (N,), grad (N,n), holo (N,n,n), mixed (N,n,n)) of rho."""
        z = np.asarray(pts, dtype=complex)
        if z.ndim == 1:
            z = z[None, :]
        if self.kind == "rescaled":
            val0, g0, h0, m0 = self.base.bundle_batch(z)
            scale = self.lam * np.exp(self.lam * val0)
            val = np.expm1(self.lam * val0)
            grad = scale[:, None] * g0
            outer_hh = np.einsum("ni,nj->nij", g0, g0)
            outer_hm = np.einsum("ni,nj->nij", g0, np.conj(g0))
            holo = scale[:, None, None] * (h0 + self.lam * outer_hh)
            mixed = scale[:, None, None] * (m0 + self.lam * outer_hm)
            return val, grad, holo, mixed
        poly, grads, holo_p, mixed_p = _deriv_polys(self.kind, self.n)
        n, N = self.n, z.shape[0]
        val = np.real(poly(z)) - self.epsilon
        grad = np.stack([grads[k](z) for k in range(n)], axis=1)
        holo = np.empty((N, n, n), dtype=complex)
        mixed = np.empty((N, n, n), dtype=complex)
        for j in range(n):
            for k in range(n):
                holo[:, j, k] = holo_p[j][k](z)
                mixed[:, j, k] = mixed_p[j][k](z)
        return val, grad, holo, mixed

    def bundle(self, point):
        z = self.coords(point)
        val, grad, holo, mixed = self.bundle_batch(z[None, :])
        return DerivativeBundle(float(val[0]), grad[0], holo[0], mixed[0])

    # -- boundary sampling --------------------------------------------------
    def boundary_samples(self, count, rng, translate_box=((-1.0, 1.0),) * 3):
        """Points on {rho = 0}.

        Imaginary directions are drawn uniformly from the sphere of radius
        sqrt(epsilon), cylinder/abelian real parts from a fundamental box,
        and group kinds are pushed around by random right translations so
        the sample covers the compact quotient.
        """
        if self.kind == "rescaled":
            return self.base.boundary_samples(count, rng, translate_box)
        if self.epsilon <= 0:
            raise ValueError("boundary sampling needs a positive tube radius")
        r = np.sqrt(self.epsilon)
        if self.kind == "abelian":
            y = _sphere(rng, count, self.n) * r
            x = rng.random((count, self.n))
            return x + 1j * y
        if self.kind == "heisenberg-phi":
            th = _sphere(rng, count, 3) * r
            t = _box_samples(rng, count, translate_box)
            e = exp_i_coords(th[:, 0], th[:, 1], th[:, 2])
            Z = mul_coords(*e, t[:, 0], t[:, 1], t[:, 2])
            return np.stack(Z, axis=1)
        if self.kind == "thickened-phi-tilde":
            v = _sphere(rng, count, 4) * r
            x0 = rng.random(count)
            t = _box_samples(rng, count, translate_box)
            e = exp_i_coords(v[:, 1], v[:, 2], v[:, 3])
            Z = mul_coords(*e, t[:, 0], t[:, 1], t[:, 2])
            z0 = x0 + 1j * v[:, 0]
            return np.stack([z0, *Z], axis=1)
        raise ValueError(f"unknown kind {self.kind!r}")


def derivatives(model, point):
    """Analytic derivative bundle of the model's defining function."""
    return model.bundle(point)


def rescaled_model(model, lam):
    """Replace rho by exp(lam*rho) - 1; the zero set is unchanged."""
    if lam <= 0:
        raise ValueError("rescaling strength must be positive")
    return GaugeModel("rescaled", model.n, model.epsilon, float(lam), model)


# ----------------------------------------------------------------------
# finite-difference oracle


def fd_bundle(model, point, h=1e-5):
    """Central-difference derivative bundle, independent of the analytic path.

    The step h trades truncation (O(h^2)) against rounding; for Hessian
    entries the rounding term scales like eps/h^2, so Richardson ratio
    checks should run at h >= 1e-3 or so.
    """
    z = model.coords(point)
    n = len(z)

    def value(x, y):
        return float(np.real(model.defining_value(x + 1j * y)))

    x0 = np.real(z).astype(float)
    y0 = np.imag(z).astype(float)

    def f_real(vec):
        return value(vec[:n], vec[n:])

    v0 = np.concatenate([x0, y0])
    m = 2 * n
    grad_r = np.zeros(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        grad_r[i] = (f_real(v0 + e) - f_real(v0 - e)) / (2 * h)
    hess_r = np.zeros((m, m))
    f0 = f_real(v0)
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        hess_r[i, i] = (f_real(v0 + 2 * ei) - 2 * f0 + f_real(v0 - 2 * ei)) / (4 * h * h)
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = h
            val = (
                f_real(v0 + ei + ej)
                - f_real(v0 + ei - ej)
                - f_real(v0 - ei + ej)
                + f_real(v0 - ei - ej)
            ) / (4 * h * h)
            hess_r[i, j] = val
            hess_r[j, i] = val

    # Wirtinger combinations of the real derivatives
    gx, gy = grad_r[:n], grad_r[n:]
    grad = 0.5 * (gx - 1j * gy)
    Hxx = hess_r[:n, :n]
    Hyy = hess_r[n:, n:]
    Hxy = hess_r[:n, n:]
    holo = 0.25 * ((Hxx - Hyy) - 1j * (Hxy + Hxy.T))
    mixed = 0.25 * ((Hxx + Hyy) + 1j * (Hxy - Hxy.T))
    return DerivativeBundle(f0, grad, holo, mixed)
