"""Acceptance gate: one test per criterion, printing a pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  Tolerances are pinned here, not tuned at runtime.
"""

import json
import time
from dataclasses import replace

import numpy as np

from heisentube.analysis import (
    ProductBump,
    TubeBump,
    amenability_check,
    continuity_sweep,
    escape_sequence,
    fubini_check,
    gram_rank,
    l1_group_norm,
    lp_threshold_sweep,
    model_derivative_exponent,
    separation_witness,
    unitarity_check,
)
from heisentube.campaigns import sqs_remainder_fit
from heisentube.cli import RunConfig, run
from heisentube.gauge import (
    GaugeModel,
    TubePoint,
    phi_coords,
    project_to_group,
    translate,
)
from heisentube.heisenberg import (
    ComplexGroupElement,
    GroupElement,
    embed,
    exp_i,
    factorize,
    inverse,
    mul,
    mul_coords,
)
from heisentube.levi import bound_constants, certify_spc, negative_real_part_check
from heisentube.quadrature import (
    QuadratureSpec,
    integrate_box,
    model_integral_closed_form,
)
from heisentube.analysis import thickened_levi_polynomial

EPS = 0.1


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[ACCEPT {num:02d}] {status} {name}  {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def timed(t0):
    return f"[{time.perf_counter() - t0:.1f}s]"


def test_c01_exact_algebra_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(10_000):
        a, b, c = (GroupElement(*rng.uniform(-2, 2, 3)) for _ in range(3))
        lhs, rhs = mul(mul(a, b), c), mul(a, mul(b, c))
        worst = max(worst, *(abs(x - y) for x, y in zip(lhs.coords(), rhs.coords())))
        inv = mul(a, inverse(a)).coords()
        worst = max(worst, *(abs(x) for x in inv))
    for _ in range(1000):
        Z = ComplexGroupElement(*(complex(*rng.uniform(-2, 2, 2)) for _ in range(3)))
        th, t = factorize(Z)
        recon = mul(exp_i(th), embed(t))
        worst = max(worst, *(abs(x - y) for x, y in zip(recon.coords(), Z.coords())))
    for _ in range(1000):
        v = rng.uniform(-1, 1, 6)
        p = TubePoint(
            complex(rng.uniform(0, 1), rng.uniform(-0.2, 0.2)),
            ComplexGroupElement(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5])),
        )
        s = GroupElement(*rng.uniform(-1, 1, 3))
        lhs = project_to_group(translate(p, s))
        rhs = mul(project_to_group(p), s)
        worst = max(worst, *(abs(x - y) for x, y in zip(lhs.coords(), rhs.coords())))
    report(1, "exact algebra suite", worst < 1e-12, f"max residual {worst:.2e} {timed(t0)}")


def test_c02_gauge_invariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(102)
    n = 10_000
    v = rng.uniform(-1.5, 1.5, (n, 6))
    zs = np.stack([v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3], v[:, 4] + 1j * v[:, 5]], axis=1)
    ts = rng.uniform(-1.5, 1.5, (n, 3))
    zt = np.stack(mul_coords(zs[:, 0], zs[:, 1], zs[:, 2], ts[:, 0], ts[:, 1], ts[:, 2]), axis=1)
    inv_resid = float(np.max(np.abs(
        phi_coords(zt[:, 0], zt[:, 1], zt[:, 2]) - phi_coords(zs[:, 0], zs[:, 1], zs[:, 2])
    )))
    on_group = float(np.max(np.abs(phi_coords(ts[:, 0] + 0j, ts[:, 1] + 0j, ts[:, 2] + 0j))))
    ok = inv_resid < 1e-10 and on_group == 0.0
    report(2, "gauge invariance", ok, f"max|phi(Zt)-phi(Z)| {inv_resid:.2e}, on-group {on_group:g} {timed(t0)}")


def test_c03_quadratic_remainder():
    t0 = time.perf_counter()
    fit, _, _ = sqs_remainder_fit(np.random.default_rng(103))
    report(3, "quadratic remainder exponent", fit.slope >= 2.9,
           f"fitted exponent {fit.slope:.3f} (needs >= 2.9) {timed(t0)}")


def test_c04_strong_pseudoconvexity():
    t0 = time.perf_counter()
    cert = certify_spc(GaugeModel.thickened(EPS), EPS, grid=10_000, seed=104)
    ab = certify_spc(GaugeModel.abelian(2), EPS, grid=2_000, seed=104)
    ok = (
        cert.verdict == "certified"
        and cert.min_eigenvalue > 0
        and ab.verdict == "certified"
        and abs(ab.min_eigenvalue - 0.5) < 1e-10
    )
    report(4, "strong pseudoconvexity", ok,
           f"thickened margin {cert.min_eigenvalue:.4f}, abelian {ab.min_eigenvalue:.12f} {timed(t0)}")


def test_c05_levi_polynomial_bounds():
    t0 = time.perf_counter()
    model, F = thickened_levi_polynomial(EPS)
    r = 0.05 * np.sqrt(EPS)
    C1, D1 = bound_constants(F, model, r, 65_536, np.random.default_rng(105))
    C2, D2 = bound_constants(F, model, r, 131_072, np.random.default_rng(105))
    max_re = negative_real_part_check(F, model, r, 10_000, np.random.default_rng(105))
    ok = (
        C1 > 0
        and np.isfinite(D1)
        and abs(C2 - C1) <= 0.2 * C1
        and abs(D2 - D1) <= 0.2 * D1
        and max_re < 0
    )
    report(5, "Levi polynomial bounds", ok,
           f"C {C1:.4f}->{C2:.4f}, D {D1:.4f}->{D2:.4f}, max Re f {max_re:.2e} {timed(t0)}")


def test_c06_lp_threshold():
    t0 = time.perf_counter()
    spec = QuadratureSpec(mode="monte-carlo", mc_samples=1_000_000, seed=106)
    sweep = lp_threshold_sweep(EPS, [0.5, 1.0, 1.5, 2.5, 3.0], p=2.0, levels=10, spec=spec)
    ok = all(sweep.verdicts[t] == "convergent" for t in (0.5, 1.0, 1.5)) and all(
        sweep.verdicts[t] == "divergent" for t in (2.5, 3.0)
    )
    report(6, "L^p integrability threshold", ok, f"verdicts {sweep.verdicts} {timed(t0)}")


def test_c07_group_l1_norm():
    t0 = time.perf_counter()
    xi = TubePoint(1j * np.sqrt(EPS), ComplexGroupElement())
    fin = l1_group_norm(xi, 1.0, EPS)
    div = l1_group_norm(xi, 1.6, EPS)
    ok = fin.verdict == "finite" and div.verdict == "divergent"
    report(7, "orbit L1 norm", ok,
           f"tau=1 {fin.verdict} ({fin.value:.4f}), tau=1.6 {div.verdict} {timed(t0)}")


def test_c08_model_integral():
    t0 = time.perf_counter()
    worst_rel = 0.0
    for sigma in (1.0, 0.1, 0.01):
        closed = model_integral_closed_form(sigma, 1.0)
        quad = integrate_box(
            lambda p, s=sigma: p[:, 0] ** 2 / (s + 4 * p[:, 0] ** 2),
            [(0.0, 1.0)],
            QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13),
        )
        worst_rel = max(worst_rel, abs(float(np.real(quad.value)) - closed) / closed)
    exps = {k: model_derivative_exponent(1.0, k) for k in (1, 2, 3)}
    ok = worst_rel < 1e-8 and all(
        abs(exps[k] - target) <= 0.1 for k, target in ((1, -0.5), (2, -1.5), (3, -2.5))
    )
    report(8, "radial model integral", ok,
           f"max rel err {worst_rel:.2e}, exponents {exps[1]:.3f}/{exps[2]:.3f}/{exps[3]:.3f} {timed(t0)}")


def test_c09_amenability_verdicts():
    t0 = time.perf_counter()
    blow = amenability_check(EPS, tau=1.0, k=3)
    bounded = amenability_check(EPS, tau=1.0, k=0)
    ok = (
        blow.verdict == "blowup"
        and blow.r_squared >= 0.95
        and not blow.flags
        and bounded.verdict == "bounded"
    )
    report(9, "convolution blow-up", ok,
           f"k=3 {blow.verdict} (exp {blow.fitted_exponent:.2f}, R2 {blow.r_squared:.4f}), "
           f"k=0 {bounded.verdict} {timed(t0)}")


def test_c10_representation_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(110)
    spec = QuadratureSpec(mode="monte-carlo", mc_samples=200_000, seed=110)
    failures = []
    for trial in range(20):
        center = tuple(rng.uniform(-0.3, 0.3, 3))
        h = TubeBump(EPS, center, rng.uniform(0.3, 0.6), fiber_fraction=rng.uniform(0.6, 0.9))
        t = GroupElement(*rng.uniform(-0.4, 0.4, 3))
        out = unitarity_check(h, t, EPS, spec, rng)
        if out.discrepancy > 3.0 * out.combined_error:
            failures.append((trial, out.discrepancy, out.combined_error))
    h = TubeBump(EPS, (0.0, 0.0, 0.0), 0.5)
    rows = continuity_sweep(h, GroupElement(0.4, 0.3, 0.2), EPS, 5, spec, rng)
    norms = [r["diff_norm"] for r in rows]
    monotone = all(b < a for a, b in zip(norms, norms[1:]))
    ok = not failures and monotone and norms[-1] < 0.15 * norms[0]
    report(10, "representation properties", ok,
           f"unitarity failures {failures}, continuity {norms[0]:.4f}->{norms[-1]:.4f} {timed(t0)}")


def test_c11_separation_and_gram_growth():
    t0 = time.perf_counter()
    rng = np.random.default_rng(111)
    spec = QuadratureSpec(mode="monte-carlo", mc_samples=200_000, seed=111)
    seq = escape_sequence(10)
    w = separation_witness(1.0, seq, samples=100_000, rng=rng)
    ok = w.found and w.index < 10 and w.overlaps[-1] == 0.0
    h = TubeBump(EPS, (0.0, 0.0, 0.0), 0.45)
    ranks = {}
    spreads = {}
    for m in (1, 2, 4, 8):
        rep = gram_rank(h, seq, m, EPS, spec, rng)
        ranks[m] = rep.rank
        spreads[m] = float(rep.eigenvalues[0] / rep.eigenvalues[-1])
        ok = ok and rep.rank == m and rep.eigenvalues[0] >= 1e-3 * rep.eigenvalues[-1]
    report(11, "separation and Gram growth", ok,
           f"witness index {w.index}, ranks {ranks}, min/max eig {spreads[8]:.3f} {timed(t0)}")


def test_c12_slice_fubini():
    t0 = time.perf_counter()
    spec = QuadratureSpec(mode="monte-carlo", mc_samples=400_000, seed=112)
    out = fubini_check(ProductBump(0.4), 0.4, spec, np.random.default_rng(112))
    ok = out.discrepancy <= 3.0 * out.combined_error
    report(12, "slice/Fubini consistency", ok,
           f"|lhs-rhs| {out.discrepancy:.2e} vs 3*err {3 * out.combined_error:.2e} {timed(t0)}")


def test_c13_reproducibility(tmp_path):
    t0 = time.perf_counter()
    config = replace(
        RunConfig(),
        command="lp-sweep",
        levels=6,
        mc_samples=100_000,
        out_dir=str(tmp_path / "rep"),
        seed=13,
    )
    run(config)
    snapshot = {p.name: p.read_bytes() for p in (tmp_path / "rep").iterdir()}
    run(config)
    identical = True
    for p in sorted((tmp_path / "rep").iterdir()):
        if p.name == "metadata.json":
            a = json.loads(snapshot[p.name].decode())
            b = json.loads(p.read_text())
            a.pop("wallclock")
            b.pop("wallclock")
            identical &= a == b
        else:
            identical &= p.read_bytes() == snapshot[p.name]
    config2 = replace(config, command="certify-spc", grid=1000, out_dir=str(tmp_path / "rep2"))
    run(config2)
    snap2 = {p.name: p.read_bytes() for p in (tmp_path / "rep2").iterdir()}
    run(config2)
    for p in sorted((tmp_path / "rep2").iterdir()):
        if p.name == "metadata.json":
            a = json.loads(snap2[p.name].decode())
            b = json.loads(p.read_text())
            a.pop("wallclock")
            b.pop("wallclock")
            identical &= a == b
        else:
            identical &= p.read_bytes() == snap2[p.name]
    report(13, "byte reproducibility", identical, f"two commands, two runs each {timed(t0)}")
