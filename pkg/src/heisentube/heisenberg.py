"""Exact algebra of the 3x3 unitriangular group over R and C.

An element is the coordinate triple (a1, a2, a3) of the matrix
[[1, a1, a3], [0, 1, a2], [0, 0, 1]].  The group law, inverse and the
exp/log of nilpotent algebra elements are exact polynomial maps of the
coordinates, so everything here is allocation-light and loop-free.  The
3x3 matrix picture appears only in test oracles.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupElement",
    "ComplexGroupElement",
    "AlgebraElement",
    "HaarMeasure",
    "IDENTITY",
    "C_IDENTITY",
    "FactorizationError",
    "mul",
    "inverse",
    "embed",
    "exp_i",
    "factorize",
    "unimodularity_check",
    "mul_coords",
    "inverse_coords",
    "exp_i_coords",
    "factorize_coords",
    "right_translate_box",
    "left_translate_box",
]


class FactorizationError(RuntimeError):
    """Round-trip residual of the exp/real factorization exceeded tolerance."""


@dataclass(frozen=True)
class GroupElement:
    """Real point, coordinates of the unitriangular matrix."""

    t1: float = 0.0
    t2: float = 0.0
    t3: float = 0.0

    def coords(self):
        return (self.t1, self.t2, self.t3)


@dataclass(frozen=True)
class ComplexGroupElement:
    """Complexified point."""

    z1: complex = 0j
    z2: complex = 0j
    z3: complex = 0j

    def coords(self):
        return (self.z1, self.z2, self.z3)


@dataclass(frozen=True)
class AlgebraElement:
    """Strictly upper-triangular matrix; its third power vanishes."""

    theta1: float = 0.0
    theta2: float = 0.0
    theta3: float = 0.0

    def coords(self):
        return (self.theta1, self.theta2, self.theta3)

    def norm_sq(self):
        return self.theta1**2 + self.theta2**2 + self.theta3**2


@dataclass(frozen=True)
class HaarMeasure:
    """Bi-invariant measure: plain Lebesgue dt1 dt2 dt3 in coordinates."""

    normalization: float = 1.0

    def box_volume(self, box):
        vol = self.normalization
        for lo, hi in box:
            vol *= hi - lo
        return vol


IDENTITY = GroupElement()
C_IDENTITY = ComplexGroupElement()


# ----------------------------------------------------------------------
# coordinate kernels (work elementwise on scalars or numpy arrays)

def mul_coords(a1, a2, a3, b1, b2, b3):
    return a1 + b1, a2 + b2, a3 + b3 + a1 * b2


def inverse_coords(a1, a2, a3):
    return -a1, -a2, -a3 + a1 * a2


def exp_i_coords(th1, th2, th3):
    # exp(i*Theta) = I + i*Theta - Theta^2/2 by nilpotence
    return 1j * th1, 1j * th2, 1j * th3 - 0.5 * (th1 * th2)


def factorize_coords(z1, z2, z3):
    """Split Z = exp(i*Theta) * t; returns (th1, th2, th3, t1, t2, t3).

    No residual checks; the scalar :func:`factorize` is the checked API.
    """
    th1 = np.imag(z1)
    th2 = np.imag(z2)
    th3 = np.imag(z3) - np.real(z2) * np.imag(z1)
    e1, e2, e3 = exp_i_coords(-th1, -th2, -th3)
    t1, t2, t3 = mul_coords(e1, e2, e3, z1, z2, z3)
    return th1, th2, th3, np.real(t1), np.real(t2), np.real(t3)


# ----------------------------------------------------------------------
# element-level operations

def mul(a, b):
    if isinstance(a, GroupElement) and isinstance(b, GroupElement):
        return GroupElement(*mul_coords(*a.coords(), *b.coords()))
    if isinstance(a, ComplexGroupElement) and isinstance(b, ComplexGroupElement):
        return ComplexGroupElement(*mul_coords(*a.coords(), *b.coords()))
    raise TypeError("mul needs two elements of the same kind; use embed() first")


def inverse(a):
    if isinstance(a, GroupElement):
        return GroupElement(*inverse_coords(*a.coords()))
    if isinstance(a, ComplexGroupElement):
        return ComplexGroupElement(*inverse_coords(*a.coords()))
    raise TypeError(f"cannot invert {type(a).__name__}")


def embed(t):
    """Real group element as a complex one (zero imaginary parts)."""
    return ComplexGroupElement(complex(t.t1), complex(t.t2), complex(t.t3))


def exp_i(theta):
    """exp(i * theta); the series terminates after the quadratic term."""
    return ComplexGroupElement(*exp_i_coords(*theta.coords()))


def factorize(Z, tol=1e-12):
    """Unique decomposition Z = exp(i*Theta) * t with t real.

    Theta is read off the coordinates (the arctangent series collapses to
    its linear term by nilpotence) and t = exp(-i*Theta) * Z.  Raises
    :class:`FactorizationError` if t fails to be real or the round trip
    does not reconstruct Z; that signals a bug, not a domain restriction.
    """
    th1 = Z.z1.imag
    th2 = Z.z2.imag
    th3 = Z.z3.imag - Z.z2.real * Z.z1.imag
    theta = AlgebraElement(th1, th2, th3)
    tc = mul(exp_i(AlgebraElement(-th1, -th2, -th3)), Z)
    scale = max(1.0, *(abs(c) for c in Z.coords()))
    imag_resid = max(abs(tc.z1.imag), abs(tc.z2.imag), abs(tc.z3.imag))
    if imag_resid > tol * scale:
        raise FactorizationError(
            f"real factor has imaginary residual {imag_resid:.3e} (tol {tol:.1e})"
        )
    t = GroupElement(tc.z1.real, tc.z2.real, tc.z3.real)
    recon = mul(exp_i(theta), embed(t))
    recon_resid = max(abs(x - y) for x, y in zip(recon.coords(), Z.coords()))
    if recon_resid > tol * scale:
        raise FactorizationError(
            f"reconstruction residual {recon_resid:.3e} (tol {tol:.1e})"
        )
    return theta, t


# ----------------------------------------------------------------------
# translated boxes and the unimodularity probe

def right_translate_box(box, s):
    """Exact bounding box of {g * s : g in box}."""
    (l1, h1), (l2, h2), (l3, h3) = box
    c3 = [g3 + s.t3 + g1 * s.t2 for g3 in (l3, h3) for g1 in (l1, h1)]
    return (
        (l1 + s.t1, h1 + s.t1),
        (l2 + s.t2, h2 + s.t2),
        (min(c3), max(c3)),
    )


def left_translate_box(box, s):
    """Exact bounding box of {s * g : g in box}."""
    (l1, h1), (l2, h2), (l3, h3) = box
    c3 = [g3 + s.t3 + s.t1 * g2 for g3 in (l3, h3) for g2 in (l2, h2)]
    return (
        (l1 + s.t1, h1 + s.t1),
        (l2 + s.t2, h2 + s.t2),
        (min(c3), max(c3)),
    )


def _box_volume(box):
    vol = 1.0
    for lo, hi in box:
        vol *= hi - lo
    return vol


def unimodularity_check(box, t, samples=1_000_000, seed=0):
    """Monte-Carlo probe that right and left translation preserve volume.

    Estimates vol(box), vol(box*t) and vol(t*box) under coordinate
    Lebesgue measure by sampling the bounding box of each translated set
    and testing membership through the inverse translation.  Returns the
    maximum pairwise relative discrepancy; both translation Jacobians are
    identically one, so it should vanish as the sample count grows.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    vol0 = _box_volume(box)
    if vol0 <= 0:
        raise ValueError("degenerate box")
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    t_inv = inverse(t)

    def estimate(bbox, pullback):
        lo = np.array([l for l, _ in bbox])
        hi = np.array([h for _, h in bbox])
        pts = lo + rng.random((samples, 3)) * (hi - lo)
        g1, g2, g3 = pullback(pts[:, 0], pts[:, 1], pts[:, 2])
        inside = np.ones(samples, dtype=bool)
        for lo_k, hi_k, g in zip(lows, highs, (g1, g2, g3)):
            inside &= (g >= lo_k) & (g <= hi_k)
        return _box_volume(bbox) * inside.mean()

    # p in box*t  <=>  p * t^-1 in box ; p in t*box  <=>  t^-1 * p in box
    vol_right = estimate(
        right_translate_box(box, t),
        lambda p1, p2, p3: mul_coords(p1, p2, p3, *t_inv.coords()),
    )
    vol_left = estimate(
        left_translate_box(box, t),
        lambda p1, p2, p3: mul_coords(*t_inv.coords(), p1, p2, p3),
    )
    vols = [vol0, vol_right, vol_left]
    worst = max(abs(a - b) for a in vols for b in vols)
    return worst / vol0
