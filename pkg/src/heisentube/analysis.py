"""Verification campaigns on the thickened tube.

Each campaign is a pure function of its inputs and a quadrature spec:
integrability sweeps around the boundary singularity, the group-orbit L1
norm, the convolution blow-up study, unitarity and strong continuity of
the right-translation operators, escaping sequences with their separation
witnesses, Gram-rank growth of translated test functions, and the
slice/Fubini consistency check.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .fitting import fit_loglog
from .gauge import GaugeModel, TubePoint
from .heisenberg import (
    ComplexGroupElement,
    GroupElement,
    exp_i,
    inverse,
    mul_coords,
    right_translate_box,
)
from .levi import eval_power, levi_polynomial, tangent_basis
from .quadrature import (
    CutoffFunction,
    ConvolutionKernel,
    QuadratureSpec,
    TubeBatch,
    bump_profile,
    convolve,
    model_integral,
    tube_integral,
)

__all__ = [
    "BlowupReport",
    "EscapingSequence",
    "GramReport",
    "QuotientSection",
    "TubeBump",
    "ProductBump",
    "UnitarityResult",
    "L1Result",
    "LpSweepResult",
    "WitnessResult",
    "FubiniResult",
    "quasi_norm",
    "dilate",
    "escape_sequence",
    "model_derivative_exponent",
    "separation_witness",
    "gram_rank",
    "lp_threshold_sweep",
    "l1_group_norm",
    "amenability_check",
    "unitarity_check",
    "continuity_sweep",
    "restrict_slice",
    "fubini_check",
    "base_boundary_point",
    "thickened_levi_polynomial",
]

# integrability thresholds for the thickened tube of the 3-dimensional group:
# L2 requires tau < (complex dimension)/2 = 2, orbitwise L1 requires 2*tau < 3
L2_TAU_LIMIT = 2.0
L1_TAU_LIMIT = 1.5


# ----------------------------------------------------------------------
# base point plumbing


def base_boundary_point(epsilon):
    """The reference boundary point (i*sqrt(eps), 0, 0, 0) of the thickened tube."""
    return np.array([1j * np.sqrt(epsilon), 0, 0, 0], dtype=complex)


def thickened_levi_polynomial(epsilon):
    model = GaugeModel.thickened(epsilon)
    return model, levi_polynomial(model, base_boundary_point(epsilon))


def default_cutoff(epsilon, scale=1.0):
    r = np.sqrt(epsilon)
    return CutoffFunction(base_boundary_point(epsilon), scale * 2.5 * r, scale * 3.0 * r)


# ----------------------------------------------------------------------
# test functions in tube coordinates


@dataclass(frozen=True)
class TubeBump:
    """Smooth bump in fiber/group coordinates, compactly supported.

    Vanishes for |t - center| >= group_radius or when the fiber radius
    (y0^2 + |theta|^2)^(1/2) exceeds fiber_fraction * sqrt(epsilon).
    """

    epsilon: float
    group_center: tuple = (0.0, 0.0, 0.0)
    group_radius: float = 0.5
    fiber_fraction: float = 0.9
    amplitude: float = 1.0

    @property
    def group_box(self):
        return tuple((c - self.group_radius, c + self.group_radius) for c in self.group_center)

    def __call__(self, batch):
        c = np.asarray(self.group_center)
        qg = np.sum((batch.t - c) ** 2, axis=1) / self.group_radius**2
        rf = self.fiber_fraction * np.sqrt(self.epsilon)
        qf = (batch.y0**2 + np.sum(batch.theta**2, axis=1)) / rf**2
        return self.amplitude * bump_profile(qg) * bump_profile(qf)


@dataclass(frozen=True)
class ProductBump:
    """Cylinder factor times a group/fiber factor, for slice decompositions."""

    delta: float
    x0_center: float = 0.5
    x0_width: float = 0.18
    y0_width_fraction: float = 0.55
    theta_fraction: float = 0.5
    group_radius: float = 0.5

    @property
    def group_box(self):
        r = self.group_radius
        return ((-r, r),) * 3

    @property
    def cylinder_support(self):
        wy = self.y0_width_fraction * np.sqrt(self.delta)
        return (
            (self.x0_center - self.x0_width, self.x0_center + self.x0_width),
            (-wy, wy),
        )

    def cylinder_factor(self, x0, y0):
        wy = self.y0_width_fraction * np.sqrt(self.delta)
        q = ((x0 - self.x0_center) / self.x0_width) ** 2 + (y0 / wy) ** 2
        return bump_profile(q)

    def slice_factor(self, batch):
        rth = self.theta_fraction * np.sqrt(self.delta)
        qth = np.sum(batch.theta**2, axis=1) / rth**2
        qg = np.sum(batch.t**2, axis=1) / self.group_radius**2
        return bump_profile(qth) * bump_profile(qg)

    def __call__(self, batch):
        return self.cylinder_factor(batch.x0, batch.y0) * self.slice_factor(batch)


# ----------------------------------------------------------------------
# quasi-norm, escaping sequences, separation


def quasi_norm(t):
    """Homogeneous quasi-norm ((t1^2+t2^2)^2 + t3^2)^(1/4).

    Right-invariant as a distance via d(x, y) = N(x * y^-1); satisfies the
    triangle inequality up to a constant <= 2.
    """
    if isinstance(t, GroupElement):
        t1, t2, t3 = t.coords()
    else:
        arr = np.asarray(t, dtype=float)
        t1, t2, t3 = arr[..., 0], arr[..., 1], arr[..., 2]
    return ((t1**2 + t2**2) ** 2 + t3**2) ** 0.25


def dilate(t, r):
    """Homogeneous dilation (r t1, r t2, r^2 t3); scales the quasi-norm by r."""
    return GroupElement(r * t.t1, r * t.t2, r * r * t.t3)


@dataclass
class EscapingSequence:
    """Group elements leaving every compact set, quasi-norms strictly increasing."""

    elements: list
    norms: list

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.norms, self.norms[1:])):
            raise ValueError("quasi-norms must be strictly increasing")


def escape_sequence(m, floors=None, direction=GroupElement(1.0, 0.75, 0.5), margin=1.05):
    """Sequence with quasi-norm floors (default 2^j), built by dilation.

    Guarantees quasi_norm(t_j) >= floors[j] with strict growth.
    """
    if m < 1:
        raise ValueError("need at least one element")
    if floors is None:
        floors = [2.0**j for j in range(1, m + 1)]
    if len(floors) < m:
        raise ValueError("not enough floors")
    n0 = quasi_norm(direction)
    elements, norms = [], []
    for j in range(m):
        r = margin * floors[j] / n0
        t = dilate(direction, r)
        elements.append(t)
        norms.append(float(quasi_norm(t)))
    return EscapingSequence(elements, norms)


@dataclass
class WitnessResult:
    found: bool
    element: GroupElement | None
    index: int
    overlaps: list  # sampled overlap fraction per tried element


def _quasi_ball_samples(R, count, rng):
    box_lo = np.array([-R, -R, -R * R])
    box_hi = np.array([R, R, R * R])
    out = []
    got = 0
    while got < count:
        draw = box_lo + rng.random((count, 3)) * (box_hi - box_lo)
        keep = quasi_norm(draw) <= R
        out.append(draw[keep])
        got += int(keep.sum())
    return np.concatenate(out)[:count]


def separation_witness(R, sequence, samples=100_000, rng=None):
    """First element t of the sequence with K and K*t sampled disjoint.

    K is the quasi-ball of radius R about the identity; for each candidate
    the check draws `samples` points k of K and looks for k*t in K.  The
    quasi-triangle constant bounds how soon a witness must appear once the
    sequence outgrows a few multiples of R.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    overlaps = []
    for idx, t in enumerate(sequence.elements):
        k = _quasi_ball_samples(R, samples, rng)
        kt = np.stack(
            mul_coords(k[:, 0], k[:, 1], k[:, 2], t.t1, t.t2, t.t3), axis=1
        )
        inside = quasi_norm(kt) <= R
        frac = float(inside.mean())
        overlaps.append(frac)
        if frac == 0.0:
            return WitnessResult(True, t, idx, overlaps)
    return WitnessResult(False, None, -1, overlaps)


# ----------------------------------------------------------------------
# Lp threshold sweep around the boundary singularity


@dataclass
class LpSweepResult:
    taus: list
    p: float
    levels: int
    rows: list        # dicts: tau, level, shell, partial, rel_change
    verdicts: dict    # tau -> "convergent" | "divergent" | "inconclusive"
    flags: list


def _frame_from_levi(F):
    a = np.asarray(F.a, dtype=complex)
    v = np.conj(a) / np.linalg.norm(a)
    B = tangent_basis(a[None, :])[0]
    return np.concatenate([v[:, None], B], axis=1)


def _ball_uniform(rng, count, dim_real, radius):
    v = rng.standard_normal((count, dim_real))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    rad = radius * rng.random(count) ** (1.0 / dim_real)
    return v / norms * rad[:, None]


def lp_threshold_sweep(
    epsilon,
    taus,
    p=2.0,
    levels=10,
    spec=None,
    rng=None,
    rel_change_tol=1e-3,
    divergence_ratio=0.6,
):
    """Shell-refined estimates of the integral of |chi f^-tau|^p near the base point.

    Shells are anisotropic: the distance to the base point is measured as
    |w0| + |w'|^2 in a frame whose first coordinate carries the linear part
    of the Levi polynomial, which keeps |f| comparable to the shell scale
    and the Monte-Carlo variance bounded.  Refinement level J reports the
    integral with the innermost shells beyond J excluded; convergent taus
    go Cauchy, divergent taus keep adding non-decaying shells.
    """
    spec = spec or QuadratureSpec(mode="monte-carlo")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    model, F = thickened_levi_polynomial(epsilon)
    U = _frame_from_levi(F)
    base = F.base
    r = np.sqrt(epsilon)
    h0 = 0.4 * epsilon
    chi = CutoffFunction(base, 0.9 * r, 1.05 * r)
    n_shell = max(10_000, spec.mc_samples // 40)
    taus = list(taus)
    s_exponents = [p * tau for tau in taus]

    def region_values(w0, wp, vol, inner, outer):
        """Mean contribution per tau over one sampled region."""
        w = np.concatenate([w0[:, None], wp], axis=1)
        z = base + w @ U.T
        nk = np.abs(w0) + np.sum(np.abs(wp) ** 2, axis=1)
        ind = (nk > inner) & (nk <= outer)
        ind &= np.real(model.defining_value(z)) <= 0
        fabs = np.abs(F(z))
        chiv = chi(z)
        out = []
        for s in s_exponents:
            vals = np.zeros(len(z))
            good = ind & (fabs > 0)
            vals[good] = (chiv[good] ** p) * fabs[good] ** (-s)
            out.append(vol * float(np.mean(vals)))
        return out

    # outer region: Euclidean ball minus the largest anisotropic ball
    r_out = 1.05 * r
    vol8 = np.pi**4 * r_out**8 / 24.0
    ball = _ball_uniform(rng, 4 * n_shell, 8, r_out)
    w_out = ball[:, :4] + 1j * ball[:, 4:]
    outer_vals = region_values(
        w_out[:, 0], w_out[:, 1:], vol8, inner=h0, outer=np.inf
    )

    shells = []
    for j in range(levels):
        h = h0 * 4.0**(-j)
        disk = _ball_uniform(rng, n_shell, 2, h)
        w0 = disk[:, 0] + 1j * disk[:, 1]
        bw = _ball_uniform(rng, n_shell, 6, np.sqrt(h))
        wp = bw[:, :3] + 1j * bw[:, 3:]
        vol = (np.pi * h**2) * (np.pi**3 * h**3 / 6.0)
        shells.append(region_values(w0, wp, vol, inner=h / 4.0, outer=h))

    rows = []
    verdicts = {}
    flags = []
    for i, tau in enumerate(taus):
        partial = outer_vals[i]
        shell_seq = [shells[j][i] for j in range(levels)]
        partials = []
        for j in range(levels):
            partial += shell_seq[j]
            partials.append(partial)
            rel = shell_seq[j] / partial if partial > 0 else np.inf
            rows.append(
                {
                    "tau": tau,
                    "level": j,
                    "shell": shell_seq[j],
                    "partial": partial,
                    "rel_change": rel,
                }
            )
        rels = [row["rel_change"] for row in rows if row["tau"] == tau]
        ratios = [
            shell_seq[j + 1] / shell_seq[j]
            for j in range(levels - 1)
            if shell_seq[j] > 0
        ]
        tail = ratios[-4:]
        gm_ratio = float(np.exp(np.mean(np.log(tail)))) if tail else np.inf
        if len(rels) >= 2 and rels[-1] < rel_change_tol and rels[-2] < rel_change_tol:
            verdicts[tau] = "convergent"
        elif gm_ratio >= divergence_ratio:
            verdicts[tau] = "divergent"
            flags.append(f"tau={tau:g}: shells not decaying (ratio {gm_ratio:.3g})")
        else:
            verdicts[tau] = "inconclusive"
            flags.append(f"tau={tau:g}: inconclusive (ratio {gm_ratio:.3g})")
    return LpSweepResult(taus, p, levels, rows, verdicts, flags)


# ----------------------------------------------------------------------
# group-orbit L1 norm


@dataclass
class L1Result:
    value: float
    error: float
    verdict: str  # "finite" | "divergent" | "inconclusive"
    history: list  # (floor, value, error, flag)


def l1_group_norm(xi, tau, epsilon, spec=None, floors=None, stable_tol=1e-2):
    """Refinement study of the integral over the group of |chi f^-tau|(xi * t).

    Adaptive quadrature over the support box at a sequence of shrinking
    region floors around the orbit singularity.  For 2*tau < 3 the values
    stabilize (finite); on the singular orbit with 2*tau >= 3 they keep
    growing as the floor shrinks and the result is flagged divergent.
    """
    spec = spec or QuadratureSpec(abs_tol=1e-5, rel_tol=1e-5, max_subdivisions=2**14)
    if floors is None:
        floors = tuple(2.0 ** (-8 - 3 * k) for k in range(4))
    model, F = thickened_levi_polynomial(epsilon)
    r = np.sqrt(epsilon)
    chi = CutoffFunction(base_boundary_point(epsilon), 0.6 * r, 1.0 * r)
    g0 = ComplexGroupElement(*xi.Z.coords())
    z0 = complex(xi.z0)

    def integrand(ts):
        zc = np.stack(
            mul_coords(g0.z1, g0.z2, g0.z3, ts[:, 0], ts[:, 1], ts[:, 2]), axis=1
        )
        pts = np.concatenate([np.full((len(ts), 1), z0), zc], axis=1)
        w = chi(pts)
        fv = F(pts)
        out = np.zeros(len(ts))
        ok = (np.abs(fv) > 0) & (w > 0)
        out[ok] = w[ok] * np.abs(fv[ok]) ** (-tau)
        return out

    # box around the singular candidate t* = g0^-1 wide enough for supp chi
    g_re = GroupElement(g0.z1.real, g0.z2.real, g0.z3.real)
    tstar = inverse(g_re)
    r_box = 1.05 * r
    w3 = r_box * (1.0 + abs(g_re.t1))
    box = (
        (tstar.t1 - r_box, tstar.t1 + r_box),
        (tstar.t2 - r_box, tstar.t2 + r_box),
        (tstar.t3 - w3, tstar.t3 + w3),
    )
    history = []
    from .quadrature import integrate_box

    for floor in floors:
        res = integrate_box(integrand, box, replace(spec, min_edge_frac=floor))
        history.append((floor, float(np.real(res.value)), res.error, res.flag))
        if res.flag is None:
            # fully converged; deeper floors cannot change the value
            break
    values = [h[1] for h in history]
    if len(values) == 1:
        verdict = "finite"
    else:
        incs = [b - a for a, b in zip(values, values[1:])]
        rels = [inc / max(abs(v), 1e-300) for inc, v in zip(incs, values[1:])]
        if abs(rels[-1]) < stable_tol:
            verdict = "finite"
        elif all(i > 0 for i in incs) and all(
            b >= a for a, b in zip(incs, incs[1:])
        ):
            verdict = "divergent"
        else:
            verdict = "inconclusive"
    return L1Result(values[-1], history[-1][2], verdict, history)


# ----------------------------------------------------------------------
# convolution blow-up (amenability)

_STENCILS = {
    0: {0: 1.0},
    1: {1: 0.5, -1: -0.5},
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    3: {2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5},
}


@dataclass
class BlowupReport:
    """Derivative growth along a path to the boundary, with its power fit."""

    order: int
    tau: float
    s_values: list
    sigma_values: list
    derivative_magnitudes: list
    fitted_exponent: float
    r_squared: float
    verdict: str  # "blowup" | "bounded" | "inconclusive"
    model_exponent: float | None = None
    conditions: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def _fd_apply(evaluate, s, h, order):
    coeffs = _STENCILS[order]
    acc = 0j
    for off, c in coeffs.items():
        acc += c * evaluate(s + off * h)
    return acc / h**order if order > 0 else acc


def model_derivative_exponent(tau, order, sigmas=None, delta=1.0):
    """Fitted exponent of |d^order/d sigma^order| of the radial model integral.

    Finite differences with step sigma/8 on dyadic sigma values; the
    default range sits deep enough in the asymptotic regime that the
    subleading corrections (relative size sqrt(sigma)/delta) do not bias
    the slope.
    """
    if sigmas is None:
        sigmas = [1e-3 * 2.0**(-j) for j in range(8)]

    def I(sigma):
        return model_integral(sigma, 3, tau, delta)

    mags = []
    for sg in sigmas:
        h = sg / 8.0
        mags.append(abs(_fd_apply(I, sg, h, order)))
    fit = fit_loglog(sigmas, mags)
    return fit.slope


def amenability_check(
    epsilon,
    tau=1.0,
    k=3,
    levels=range(2, 10),
    kernel=None,
    spec=None,
    stencil_fraction=0.125,
):
    """Convolve chi f^-tau against a smooth kernel along a path to the base point.

    Evaluates the k-th finite-difference derivative of the convolution at
    dyadic path points s -> sqrt(epsilon) and fits its magnitude against
    the measured sigma = |f(path(s))|.  Blow-up needs monotone growth over
    at least four dyadic steps with fit R^2 >= 0.95.  The k-th sigma
    derivative of the radial model integral is fitted the same way as a
    cross-check.  Quadrature tolerances are tightened internally because
    the stencil divides by h^k.
    """
    if k not in _STENCILS:
        raise ValueError(f"unsupported derivative order {k}")
    spec = spec or QuadratureSpec()
    qspec = replace(
        spec,
        abs_tol=min(spec.abs_tol, 1e-9),
        rel_tol=min(spec.rel_tol, 1e-9),
        max_subdivisions=max(spec.max_subdivisions, 2**16),
    )
    model, F = thickened_levi_polynomial(epsilon)
    chi = default_cutoff(epsilon)
    kernel = kernel or ConvolutionKernel(radius=0.3)
    s_star = np.sqrt(epsilon)

    def u(batch):
        pts = batch.chart()
        return chi(pts) * eval_power(F, pts, tau)

    flags = []

    def conv_value(s):
        z = TubePoint(1j * s, ComplexGroupElement())
        res = convolve(kernel, u, z, qspec)
        if res.flag is not None:
            flags.append(f"s={s:.6g}: quadrature flag {res.flag}")
        return res.value

    s_values, sigmas, mags = [], [], []
    for i in levels:
        s_i = s_star * (1.0 - 2.0**(-i))
        h = s_star * 2.0**(-i) * stencil_fraction
        d = _fd_apply(conv_value, s_i, h, k)
        s_values.append(s_i)
        sigmas.append(abs(F(np.array([1j * s_i, 0, 0, 0], dtype=complex))))
        mags.append(abs(d))

    fit = fit_loglog(sigmas, mags)
    exponent, r2 = fit.slope, fit.r_squared
    ratios = [b / a for a, b in zip(mags, mags[1:])]
    diffs = [abs(b - a) for a, b in zip(mags, mags[1:])]
    diff_ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 0]
    growing = len(ratios) >= 4 and all(rr > 1.2 for rr in ratios[-4:])
    # decaying successive differences mean the values are Cauchy, hence bounded
    settling = len(diff_ratios) >= 3 and all(rr < 0.95 for rr in diff_ratios[-3:])
    if growing and r2 >= 0.95 and exponent < 0:
        verdict = "blowup"
    elif settling and not growing:
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    model_exp = model_derivative_exponent(tau, k, sigmas, delta=0.3) if k > 0 else None
    conditions = {
        "square_integrable": 0 <= tau < L2_TAU_LIMIT,
        "orbit_l1": tau < L1_TAU_LIMIT,
        "blowup_order_sufficient": tau + k > 3,
    }
    return BlowupReport(
        k, tau, s_values, sigmas, mags, float(exponent), float(r2), verdict,
        model_exp, conditions, flags,
    )


# ----------------------------------------------------------------------
# representation checks


@dataclass
class UnitarityResult:
    discrepancy: float      # | ||t_* h|| - ||h|| | / ||h||
    combined_error: float   # propagated MC standard errors, relative
    norm: float
    warning: str | None = None


def _support_union_box(h_box, t, pad=0.15):
    shifted = right_translate_box(h_box, inverse(t))
    out = []
    for (a, b), (c, d) in zip(h_box, shifted):
        lo, hi = min(a, c), max(b, d)
        w = pad * (hi - lo)
        out.append((lo - w, hi + w))
    return tuple(out)


def _boundary_mass_fraction(h, epsilon, box, rng, samples=20_000, margin=0.05):
    from .quadrature import tube_samples

    batch = tube_samples(epsilon, box, samples, rng, thickened=True)
    w = np.abs(h(batch)) ** 2
    total = float(np.sum(w))
    if total == 0:
        return 0.0
    near = np.zeros(len(batch), dtype=bool)
    for kdim, (lo, hi) in enumerate(box):
        width = (hi - lo) * margin
        near |= (batch.t[:, kdim] < lo + width) | (batch.t[:, kdim] > hi - width)
    return float(np.sum(w[near]) / total)


def unitarity_check(h, t, epsilon, spec=None, rng=None, tail_tol=1e-6):
    """Relative discrepancy between ||h|| and ||t_* h|| on the thickened tube.

    Both norms are Monte-Carlo estimates over a group box containing the
    support of h and of its translate, sharing one sample set (so the
    identity translation gives zero exactly); a boundary-mass monitor
    warns when the squared mass near the box faces exceeds the declared
    tail bound.
    """
    spec = spec or QuadratureSpec(mode="monte-carlo")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    box = _support_union_box(h.group_box, t)
    warn = None
    frac = _boundary_mass_fraction(h, epsilon, box, rng)
    if frac > tail_tol:
        warn = f"boundary mass fraction {frac:.2e} exceeds tail bound {tail_tol:.1e}"
    from .quadrature import fiber_volume, tube_samples

    n = spec.mc_samples
    batch = tube_samples(epsilon, box, n, rng, thickened=True)
    vol = fiber_volume(epsilon, True)
    for lo, hi in box:
        vol *= hi - lo
    v1 = np.abs(np.asarray(h(batch))) ** 2
    v2 = np.abs(np.asarray(h(batch.translated(t)))) ** 2
    i1 = vol * float(np.mean(v1))
    i2 = vol * float(np.mean(v2))
    e1_i = vol * float(np.std(v1, ddof=1) / np.sqrt(n))
    e2_i = vol * float(np.std(v2, ddof=1) / np.sqrt(n))
    n1, n2 = np.sqrt(i1), np.sqrt(i2)
    e1 = e1_i / (2 * n1) if n1 > 0 else np.inf
    e2 = e2_i / (2 * n2) if n2 > 0 else np.inf
    return UnitarityResult(
        abs(n2 - n1) / n1, float(np.hypot(e1, e2) / n1), float(n1), warn
    )


def continuity_sweep(h, base_t, epsilon, steps=5, spec=None, rng=None):
    """||t_* h - h|| for dilated translations t -> identity, common samples.

    Using one sample set for every step makes the decay monotone instead of
    noise-dominated.  Returns rows (scale, t, diff_norm, error).
    """
    spec = spec or QuadratureSpec(mode="monte-carlo")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    from .quadrature import fiber_volume, tube_samples

    translations = [dilate(base_t, 2.0**(-j)) for j in range(steps)]
    box = h.group_box
    for t in translations:
        box = _support_union_box(box, t)
    n = spec.mc_samples
    batch = tube_samples(epsilon, box, n, rng, thickened=True)
    vol = fiber_volume(epsilon, True)
    for lo, hi in box:
        vol *= hi - lo
    h0 = np.asarray(h(batch))
    rows = []
    for j, t in enumerate(translations):
        diff = np.abs(np.asarray(h(batch.translated(t))) - h0) ** 2
        val = vol * float(np.mean(diff))
        err = vol * float(np.std(diff, ddof=1) / np.sqrt(n))
        norm = np.sqrt(max(val, 0.0))
        norm_err = err / (2 * norm) if norm > 0 else err
        rows.append({"scale": 2.0**(-j), "t": t, "diff_norm": norm, "error": norm_err})
    return rows


# ----------------------------------------------------------------------
# Gram rank of translates


@dataclass
class GramReport:
    m: int
    gram: np.ndarray
    eigenvalues: np.ndarray
    rank: int
    threshold: float
    errors: np.ndarray


def _intersect_boxes(a, b):
    out = []
    for (la, ha), (lb, hb) in zip(a, b):
        lo, hi = max(la, lb), min(ha, hb)
        if lo >= hi:
            return None
        out.append((lo, hi))
    return tuple(out)


def gram_rank(h, sequence, m, epsilon, spec=None, rng=None, rank_rtol=1e-6):
    """Gram matrix of the first m translates of h and its numerical rank.

    Entry (i, j) integrates h(z t_i) conj(h(z t_j)) over the intersection
    of the translated support boxes; disjoint supports contribute exact
    zeros.  Rank counts eigenvalues above rank_rtol times the largest.
    """
    spec = spec or QuadratureSpec(mode="monte-carlo")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    ts = sequence.elements[:m]
    if len(ts) < m:
        raise ValueError("sequence shorter than m")
    boxes = [right_translate_box(h.group_box, inverse(t)) for t in ts]
    gram = np.zeros((m, m), dtype=complex)
    errs = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            box = _intersect_boxes(boxes[i], boxes[j])
            if box is None:
                continue
            res = tube_integral(
                lambda b: np.asarray(h(b.translated(ts[i])))
                * np.conj(np.asarray(h(b.translated(ts[j])))),
                epsilon,
                box,
                spec,
                rng,
            )
            gram[i, j] = res.value
            gram[j, i] = np.conj(res.value)
            errs[i, j] = errs[j, i] = res.error
    eigs = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    thresh = rank_rtol * float(eigs[-1])
    rank = int(np.sum(eigs > thresh))
    return GramReport(m, gram, eigs, rank, thresh, errs)


# ----------------------------------------------------------------------
# sections, slices, Fubini


@dataclass(frozen=True)
class QuotientSection:
    """Representative choice: quotient coordinates -> tube point with trivial group part."""

    def __call__(self, x0, y0, theta):
        if not isinstance(theta, tuple):
            theta = tuple(np.asarray(theta, dtype=float))
        from .heisenberg import AlgebraElement

        return TubePoint(x0 + 1j * y0, exp_i(AlgebraElement(*theta)))


def restrict_slice(F, z0, epsilon, delta):
    """Partial application z' -> F(z0, z') on an unthickened tube copy.

    Requires (Im z0)^2 + epsilon <= delta so the slice sits inside the
    thickened tube.  The returned callable consumes unthickened batches.
    """
    z0 = complex(z0)
    if z0.imag**2 + epsilon > delta + 1e-12:
        raise ValueError(
            f"slice constraint violated: (Im z0)^2 + eps = "
            f"{z0.imag**2 + epsilon:.6g} > delta = {delta:.6g}"
        )
    x0 = z0.real % 1.0
    y0 = z0.imag

    def slice_fn(batch):
        thick = TubeBatch(
            np.full(len(batch), x0),
            np.full(len(batch), y0),
            batch.theta,
            batch.t,
            thickened=True,
        )
        return F(thick)

    return slice_fn


@dataclass
class FubiniResult:
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float
    combined_error: float

    @property
    def discrepancy(self):
        return abs(self.lhs - self.rhs)


def fubini_check(F, delta, spec=None, rng=None, grid=(20, 24), slice_samples=20_000):
    """Thickened-tube L2 mass of F versus the z0-integral of slice norms.

    The left side is one Monte-Carlo integral over the thickened tube of
    radius delta; the right side quadratures the slice-norm profile over
    the cylinder with Gauss-Legendre nodes (restricted to F's declared
    cylinder support when it has one), each slice norm being an
    unthickened tube integral at radius delta - y0^2.  The right-side
    error combines the per-slice statistical errors with a two-grid
    discretization estimate.
    """
    spec = spec or QuadratureSpec(mode="monte-carlo")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    box = F.group_box
    lhs = tube_integral(lambda b: np.abs(F(b)) ** 2, delta, box, spec, rng)

    ylim = np.sqrt(delta)
    (x_lo, x_hi), (y_lo, y_hi) = getattr(
        F, "cylinder_support", ((0.0, 1.0), (-ylim, ylim))
    )
    y_lo, y_hi = max(y_lo, -ylim), min(y_hi, ylim)
    slice_spec = replace(spec, mc_samples=slice_samples)

    def rhs_on_grid(nx, ny):
        gx, wx = np.polynomial.legendre.leggauss(nx)
        gy, wy = np.polynomial.legendre.leggauss(ny)
        x_nodes = x_lo + 0.5 * (gx + 1.0) * (x_hi - x_lo)
        x_w = 0.5 * wx * (x_hi - x_lo)
        y_nodes = y_lo + 0.5 * (gy + 1.0) * (y_hi - y_lo)
        y_w = 0.5 * wy * (y_hi - y_lo)
        total = 0.0
        var = 0.0
        for xn, wxn in zip(x_nodes, x_w):
            for yn, wyn in zip(y_nodes, y_w):
                eps_slice = delta - yn**2
                if eps_slice <= 0:
                    continue
                sl = restrict_slice(F, xn + 1j * yn, eps_slice, delta)
                res = tube_integral(
                    lambda b: np.abs(sl(b)) ** 2,
                    eps_slice,
                    box,
                    slice_spec,
                    rng,
                    thickened=False,
                )
                w = wxn * wyn
                total += w * float(np.real(res.value))
                var += (w * res.error) ** 2
        return total, float(np.sqrt(var))

    nx, ny = grid
    coarse, _ = rhs_on_grid(max(nx // 2, 4), max(ny // 2, 4))
    total, stat_err = rhs_on_grid(nx, ny)
    rhs_err = stat_err + abs(total - coarse)
    combined = float(np.hypot(lhs.error, rhs_err))
    return FubiniResult(float(np.real(lhs.value)), lhs.error, total, rhs_err, combined)
