"""Integration engine: deterministic adaptive quadrature and seeded Monte Carlo.

The adaptive path bisects boxes worst-error-first with a fixed-order
Gauss-Legendre product rule; the per-region error estimate is the change
under one bisection.  Budget exhaustion returns the current estimate with
a flag, never a silent value, and nothing here regularizes singular
integrands: divergence shows up as non-convergence and is reported.
All reductions run in a fixed order so equal seeds give equal bits.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np

from .heisenberg import exp_i_coords, factorize, mul_coords

__all__ = [
    "QuadratureSpec",
    "IntegrationResult",
    "DivergentIntegralError",
    "CutoffFunction",
    "ConvolutionKernel",
    "bump_profile",
    "smooth_step",
    "integrate_box",
    "convolve",
    "model_integral",
    "model_integral_closed_form",
    "TubeBatch",
    "tube_samples",
    "tube_integral",
    "fiber_volume",
]


class DivergentIntegralError(ValueError):
    """The requested parameters make the integral divergent."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances, budgets and the seed for one integration campaign.

    min_edge_frac, when positive, stops refinement once a region's longest
    edge falls below that fraction of the root edge; hitting the floor
    with unmet tolerance is flagged, never silent.  Shrinking the floor is
    the refinement knob for studying singular integrands.
    """

    mode: str = "adaptive"  # "adaptive" | "monte-carlo"
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_subdivisions: int = 2**16
    mc_samples: int = 1_000_000
    seed: int = 0
    min_edge_frac: float = 0.0

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.mode not in ("adaptive", "monte-carlo"):
            raise ValueError(f"unknown quadrature mode {self.mode!r}")
        if self.min_edge_frac < 0:
            raise ValueError("min_edge_frac must be nonnegative")


@dataclass
class IntegrationResult:
    value: complex
    error: float
    flag: str | None = None  # None | "budget"
    regions: int = 0
    neval: int = 0

    @property
    def converged(self):
        return self.flag is None


# ----------------------------------------------------------------------
# smooth profiles


def _exp_decay(s):
    out = np.zeros_like(s, dtype=float)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, monotone between."""
    s = np.asarray(s, dtype=float)
    a = _exp_decay(s)
    b = _exp_decay(1.0 - s)
    return a / (a + b + np.finfo(float).tiny)


def bump_profile(q):
    """exp(1 - 1/(1-q)) for q in [0,1), 0 beyond; q is the squared radius ratio."""
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    inside = q < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
    return out


@dataclass(frozen=True)
class CutoffFunction:
    """Smooth cutoff: 1 on the inner ball, 0 outside the outer ball."""

    center: np.ndarray
    r_in: float
    r_out: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=complex))
        if not (0 < self.r_in < self.r_out):
            raise ValueError("need 0 < r_in < r_out")

    def __call__(self, pts):
        z = np.asarray(pts, dtype=complex)
        scalar = z.ndim == 1
        if scalar:
            z = z[None, :]
        d = np.linalg.norm(z - self.center, axis=-1)
        vals = 1.0 - smooth_step((d - self.r_in) / (self.r_out - self.r_in))
        return float(vals[0]) if scalar else vals


@dataclass(frozen=True)
class ConvolutionKernel:
    """Smooth compactly supported convolution kernel on the group.

    A rescaled bump centered at `center` with the given radius and
    amplitude; the support box is exact.
    """

    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 0.3
    amplitude: float = 1.0

    @property
    def support_box(self):
        return tuple((c - self.radius, c + self.radius) for c in self.center)

    def __call__(self, ts):
        t = np.asarray(ts, dtype=float)
        scalar = t.ndim == 1
        if scalar:
            t = t[None, :]
        q = np.sum((t - np.asarray(self.center)) ** 2, axis=-1) / self.radius**2
        vals = self.amplitude * bump_profile(q)
        return float(vals[0]) if scalar else vals

    def mass(self, spec=None):
        """integral of the kernel over its support box."""
        res = integrate_box(lambda t: self(t), self.support_box, spec)
        return float(np.real(res.value))

    def normalized(self, spec=None):
        return ConvolutionKernel(self.center, self.radius, self.amplitude / self.mass(spec))


# ----------------------------------------------------------------------
# adaptive quadrature

_RULE_ORDER = 5
_RULE_CACHE = {}


def _product_rule(d):
    if d not in _RULE_CACHE:
        x, w = np.polynomial.legendre.leggauss(_RULE_ORDER)
        x = 0.5 * (x + 1.0)  # map to [0,1]
        w = 0.5 * w
        grids = np.meshgrid(*([x] * d), indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        wg = np.meshgrid(*([w] * d), indexing="ij")
        weights = np.prod(np.stack([g.ravel() for g in wg], axis=1), axis=1)
        _RULE_CACHE[d] = (nodes, weights)
    return _RULE_CACHE[d]


def _box_volume(lo, hi):
    return float(np.prod(hi - lo))


def integrate_box(f, box, spec=None, rng=None):
    """Integrate f over a box in R^d.

    f maps an (N, d) array of points to (N,) values (real or complex).
    Adaptive mode refines worst-first until the summed error estimate
    meets max(abs_tol, rel_tol*|value|); exhausting the subdivision budget
    flags "budget", running out of refinable regions above the edge floor
    flags "floor".  Monte-Carlo mode returns mean +/- standard error and
    is bit-reproducible for a fixed (seed, sample count).
    """
    spec = spec or QuadratureSpec()
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError("box must be a sequence of (lo, hi) pairs")
    lo, hi = box[:, 0].copy(), box[:, 1].copy()
    if np.any(hi <= lo):
        raise ValueError("degenerate box")
    d = len(lo)

    if spec.mode == "monte-carlo":
        rng = rng if rng is not None else np.random.default_rng(spec.seed)
        n = spec.mc_samples
        pts = lo + rng.random((n, d)) * (hi - lo)
        vals = np.asarray(f(pts))
        vol = _box_volume(lo, hi)
        value = vol * np.mean(vals)
        if np.iscomplexobj(vals):
            var = np.var(np.real(vals), ddof=1) + np.var(np.imag(vals), ddof=1)
        else:
            var = np.var(vals, ddof=1)
        err = vol * np.sqrt(var / n)
        return IntegrationResult(value, float(err), None, 0, n)

    nodes, weights = _product_rule(d)
    neval = 0

    def rule(rlo, rhi):
        nonlocal neval
        pts = rlo + nodes * (rhi - rlo)
        vals = np.asarray(f(pts))
        neval += len(pts)
        return np.sum(weights * vals) * _box_volume(rlo, rhi)

    def refine(rlo, rhi, parent_val):
        k = int(np.argmax(rhi - rlo))
        mid = 0.5 * (rlo[k] + rhi[k])
        lo1, hi1 = rlo.copy(), rhi.copy()
        hi1[k] = mid
        lo2, hi2 = rlo.copy(), rhi.copy()
        lo2[k] = mid
        v1 = rule(lo1, hi1)
        v2 = rule(lo2, hi2)
        err = abs(parent_val - (v1 + v2))
        return (lo1, hi1, v1), (lo2, hi2, v2), err

    floor_edge = spec.min_edge_frac * float(np.max(hi - lo))

    def at_floor(rlo, rhi):
        return floor_edge > 0 and float(np.max(rhi - rlo)) <= floor_edge

    # heap entries: (-err, counter, child1, child2) with child = (lo, hi, value);
    # popping refines both children one level further.  A child whose halves
    # reach the floor is refined once more for an honest error estimate but
    # never pushed, so its error stays in the total permanently.
    counter = 0
    root_val = rule(lo, hi)
    c1, c2, err0 = refine(lo, hi, root_val)
    total = c1[2] + c2[2]
    total_err = err0
    heap = [(-err0, counter, c1, c2)]
    splits = 1
    flag = None
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if splits >= spec.max_subdivisions:
            flag = "budget"
            break
        if not heap:
            flag = "floor"
            break
        neg_err, _, child1, child2 = heapq.heappop(heap)
        parent_err = -neg_err
        # replace the parent's attributed error by the children's
        for chlo, chhi, chval in (child1, child2):
            g1, g2, cherr = refine(chlo, chhi, chval)
            total += (g1[2] + g2[2]) - chval
            total_err += cherr
            splits += 1
            if at_floor(*g1[:2]) or at_floor(*g2[:2]):
                continue
            counter += 1
            heapq.heappush(heap, (-cherr, counter, g1, g2))
        total_err -= parent_err
    if abs(np.imag(total)) == 0:
        total = np.real(total)
    return IntegrationResult(total, float(total_err), flag, splits, neval)


# ----------------------------------------------------------------------
# the radial model integral


def model_integral_closed_form(sigma, delta):
    """Antiderivative value of r^2 / (sigma + 4 r^2) over [0, delta]."""
    if sigma < 0 or delta <= 0:
        raise ValueError("need sigma >= 0 and delta > 0")
    if sigma == 0:
        return delta / 4.0
    rs = np.sqrt(sigma)
    return delta / 4.0 - (rs / 8.0) * np.arctan(2.0 * delta / rs)


def model_integral(sigma, n, tau, delta, spec=None):
    """integral_0^delta r^(n-1) dr / (sigma + 4 r^2)^tau.

    (n, tau) = (3, 1) uses the closed form; sigma = 0 with n > 2*tau uses
    the exact power antiderivative; anything else goes through adaptive
    quadrature.  Divergent parameter combinations (sigma = 0, n <= 2*tau)
    raise :class:`DivergentIntegralError`.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0 and n - 2 * tau <= 0:
        raise DivergentIntegralError(
            f"sigma=0 with n-2*tau = {n - 2 * tau:g} <= 0 diverges at the origin"
        )
    if n == 3 and tau == 1:
        return float(model_integral_closed_form(sigma, delta))
    if sigma == 0:
        p = n - 2 * tau
        return float(delta**p / (p * 4.0**tau))

    def integrand(pts):
        r = pts[:, 0]
        return r ** (n - 1) / (sigma + 4.0 * r**2) ** tau

    res = integrate_box(integrand, [(0.0, delta)], spec)
    return float(np.real(res.value))


# ----------------------------------------------------------------------
# tube sampling and integrals


@dataclass
class TubeBatch:
    """Sample points of a tube in fiber/group coordinates.

    The fiber chart is (x0, y0, theta) with x0 the cylinder angle and the
    group chart is t; the complex chart (z0, Z) is derived on demand.
    Unthickened batches carry x0 = y0 = 0.
    """

    x0: np.ndarray
    y0: np.ndarray
    theta: np.ndarray  # (N, 3)
    t: np.ndarray      # (N, 3)
    thickened: bool = True
    _Z: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.t)

    @property
    def z0(self):
        return self.x0 + 1j * self.y0

    @property
    def Z(self):
        if self._Z is None:
            e = exp_i_coords(self.theta[:, 0], self.theta[:, 1], self.theta[:, 2])
            Z = mul_coords(*e, self.t[:, 0], self.t[:, 1], self.t[:, 2])
            self._Z = np.stack(Z, axis=1)
        return self._Z

    def chart(self):
        """Complex coordinates: (N,4) when thickened, else (N,3)."""
        if self.thickened:
            return np.concatenate([self.z0[:, None], self.Z], axis=1)
        return self.Z

    def translated(self, s):
        """Right action by a real group element (fiber chart untouched)."""
        t = np.stack(
            mul_coords(self.t[:, 0], self.t[:, 1], self.t[:, 2], s.t1, s.t2, s.t3),
            axis=1,
        )
        return TubeBatch(self.x0, self.y0, self.theta, t, self.thickened)


def fiber_volume(epsilon, thickened=True):
    """Exact volume of the fiber: cylinder x B^4 (thickened) or B^3."""
    if thickened:
        return (np.pi**2 / 2.0) * epsilon**2  # unit circle times 4-ball
    return (4.0 * np.pi / 3.0) * epsilon**1.5


def tube_samples(epsilon, group_box, count, rng, thickened=True):
    """Uniform samples of the tube in fiber/group coordinates.

    The ball factor of the fiber is drawn by rejection inside its
    bounding box; group coordinates fill the requested box.
    """
    if epsilon <= 0:
        raise ValueError("tube radius must be positive")
    dim = 4 if thickened else 3
    r = np.sqrt(epsilon)
    chunks = []
    got = 0
    while got < count:
        draw = rng.uniform(-r, r, size=(count, dim))
        keep = np.sum(draw**2, axis=1) < epsilon
        chunks.append(draw[keep])
        got += int(keep.sum())
    y = np.concatenate(chunks)[:count]
    if thickened:
        x0 = rng.random(count)
        y0 = y[:, 0]
        theta = y[:, 1:]
    else:
        x0 = np.zeros(count)
        y0 = np.zeros(count)
        theta = y
    lo = np.array([l for l, _ in group_box])
    hi = np.array([h for _, h in group_box])
    t = lo + rng.random((count, 3)) * (hi - lo)
    return TubeBatch(x0, y0, theta, t, thickened)


def tube_integral(u, epsilon, group_box, spec=None, rng=None, thickened=True):
    """Monte-Carlo integral of u over {group box} x {fiber}, product Lebesgue.

    u maps a :class:`TubeBatch` to (N,) values.  The right action moves
    only the group coordinate, and Lebesgue dt is translation invariant,
    so this measure is invariant under the group.
    """
    spec = spec or QuadratureSpec(mode="monte-carlo")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    n = spec.mc_samples
    batch = tube_samples(epsilon, group_box, n, rng, thickened)
    vals = np.asarray(u(batch))
    vol = fiber_volume(epsilon, thickened)
    for lo_k, hi_k in group_box:
        vol *= hi_k - lo_k
    value = vol * np.mean(vals)
    if np.iscomplexobj(vals):
        var = np.var(np.real(vals), ddof=1) + np.var(np.imag(vals), ddof=1)
    else:
        var = np.var(vals, ddof=1)
    err = vol * np.sqrt(var / n)
    return IntegrationResult(value, float(err), None, 0, n)


def convolve(kernel, u, z, spec=None):
    """(R_Delta u)(z) = integral over the group of Delta(t) u(z t) dt.

    z is a tube point; u is evaluated on right translates of z over the
    kernel's support box under Haar (Lebesgue) measure.  Budget flags from
    the underlying quadrature propagate in the result.
    """
    theta, t_z = factorize(z.Z)
    th = np.array(theta.coords())
    x0 = z.z0.real
    y0 = z.z0.imag

    def integrand(ts):
        w = kernel(ts)
        n = len(ts)
        t = np.stack(
            mul_coords(t_z.t1, t_z.t2, t_z.t3, ts[:, 0], ts[:, 1], ts[:, 2]),
            axis=1,
        )
        batch = TubeBatch(
            np.full(n, x0),
            np.full(n, y0),
            np.tile(th, (n, 1)),
            t,
            thickened=True,
        )
        return w * np.asarray(u(batch))

    return integrate_box(integrand, kernel.support_box, spec)
