"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line.

Thresholds marked as oracle-derived come from ``oracle_values.py``.
"""

import time

import numpy as np
import pytest

from univkern.classify import classify_all
from univkern.cli import main as cli_main
from univkern.families import (
    band_ti,
    build_kernel,
    cosine_ti,
    gaussian_ti,
    sequence_ti,
    sinc_ti,
)
from univkern.kernels import (
    CoefficientSequence,
    IndexSupport,
    Polynomial,
    SpectralMeasure,
    SupportDescriptor,
    TranslationInvariant,
    WeightedPolynomial,
    WeightSpec,
    embed,
    evaluate,
    gram,
)
from univkern.measures import (
    Density,
    SignedMeasure,
    dirac,
    fourier,
    hahn_jordan,
    to_probability_pair,
    total_mass,
    total_variation,
)
from univkern.probe import (
    DensenessProbeConfig,
    denseness_probe,
    mmd_injectivity_probe,
    muntz_probe,
    plateaus,
    witness_gap_measure,
    witness_pair,
    witness_residuals,
)
from univkern.tristate import Tri

import oracle_values as oracle
from bundled import CONFIGS, bundled_kernels

RESULTS = []


def log(n, title, ok, detail):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


Y, N = "yes", "no"


# ---- 1

def test_criterion_1_verdict_table():
    t0 = time.perf_counter()
    wp = WeightedPolynomial(
        CoefficientSequence("exponential", {}, IndexSupport("finite-complement", excluded=(3,))),
        WeightSpec.named("gaussian"))
    cases = [
        ("gaussian", gaussian_ti(), {"universal": Y, "characteristic": Y, "c0_universal": Y}),
        ("sinc", sinc_ti(), {"universal": Y, "characteristic": N, "c0_universal": N}),
        ("cosine", cosine_ti(), {"universal": N, "characteristic": N, "c0_universal": N}),
        ("n/log(n+1)", sequence_ti("n-over-log"), {"universal": Y}),
        ("poly 1/n!", build_kernel({"family": "polynomial"}), {"universal": Y}),
        ("poly even", build_kernel({"family": "polynomial", "support": {"kind": "even"}}),
         {"universal": N}),
        ("weighted gauss Z+\\{3}", wp, {"characteristic": Y, "c0_universal": Y}),
    ]
    mismatches = []
    for name, K, want in cases:
        got = {k: v.status.value for k, v in classify_all(K).items()}
        mismatches += [f"{name}.{k}={got[k]}" for k in want if got[k] != want[k]]
    dt = time.perf_counter() - t0
    log(1, "verdict table", not mismatches and dt < 1.0,
        f"{len(cases)} kernels, mismatches={mismatches or 'none'}, {dt:.3f}s")


# ---- 2

def _random_spec(rng):
    kind = rng.integers(3)
    if kind == 0:
        choice = rng.integers(5)
        if choice == 0:
            d = SupportDescriptor.full_space(int(rng.integers(1, 4)))
        elif choice == 1:
            d = SupportDescriptor.finite_set(rng.uniform(-5, 5, rng.integers(1, 5)).tolist())
        elif choice == 2:
            lo, w = rng.uniform(0, 3), rng.uniform(0.1, 3)
            d = SupportDescriptor.interval_union([(-lo - w, -lo), (lo, lo + w)])
        elif choice == 3:
            d = SupportDescriptor.sequence(str(rng.choice(["n-over-log", "linear"])))
        else:
            tri = list(Tri)
            d = SupportDescriptor.sequence("declared",
                                           has_finite_accumulation_point=tri[rng.integers(3)],
                                           limsup_n_over_lambda_infinite=tri[rng.integers(3)])
        return TranslationInvariant(SpectralMeasure(d))
    sk = str(rng.choice(["full", "even", "odd", "finite-complement", "explicit", "lacunary"]))
    if sk == "finite-complement":
        support = IndexSupport(sk, excluded=tuple(rng.integers(0, 8, rng.integers(0, 3)).tolist()))
    elif sk == "explicit":
        support = IndexSupport(sk, members=tuple(rng.integers(0, 8, rng.integers(1, 4)).tolist()))
    elif sk == "lacunary":
        support = IndexSupport(sk, base=int(rng.integers(2, 4)), include_zero=bool(rng.integers(2)))
    else:
        support = IndexSupport(sk)
    coeffs = CoefficientSequence("exponential", {}, support)
    if kind == 1:
        return Polynomial(coeffs)
    tri = list(Tri)
    w = WeightSpec.named(str(rng.choice(["gaussian", "exp-abs", "compact-bump", "rational-decay"])),
                         positive_everywhere=bool(rng.integers(2)),
                         log_integral_diverges=tri[rng.integers(3)],
                         bounded_inverse_poly_approx=tri[rng.integers(3)],
                         even_nonincreasing=bool(rng.integers(2)))
    return WeightedPolynomial(coeffs, w)


def test_criterion_2_implication_invariant():
    rng = np.random.default_rng(2)
    n_specs, bad = 300, []
    for i in range(n_specs):
        K = _random_spec(rng)
        v = {k: x.status for k, x in classify_all(K).items()}
        if v["c0_universal"] is Tri.YES and (v["characteristic"] is not Tri.YES
                                             or v["universal"] is not Tri.YES):
            bad.append(i)
        if isinstance(K, TranslationInvariant) and v["characteristic"] is not v["c0_universal"]:
            bad.append(i)
    log(2, "implication invariant", not bad, f"{n_specs} randomized specs, violations={len(bad)}")


# ---- 3

@pytest.fixture(scope="module")
def witness():
    K = band_ti()
    t0 = time.perf_counter()
    mu = witness_gap_measure(K.spectral, (0.25, 0.75))
    return K, mu, time.perf_counter() - t0


def test_criterion_3_witness_soundness(witness):
    K, mu, build_time = witness
    t0 = time.perf_counter()
    res = witness_residuals(K, mu, n_xi=100, n_x=41, x_range=5.0, seed=0)
    _, P, Q = to_probability_pair(mu)
    rep = mmd_injectivity_probe(K, [witness_pair(mu)])
    m2 = rep.table[0]["mmd2"]
    tv = total_variation(P.as_signed() - Q.as_signed())
    dt = build_time + time.perf_counter() - t0
    ok = (res["total_mass"] <= 1e-8 and res["max_fourier_on_support"] <= 1e-6
          and res["max_embed"] <= 1e-6 and m2 <= 1e-8 and tv >= 0.1 and dt < 30)
    log(3, "witness soundness", ok,
        f"|mass|={res['total_mass']:.1e} max|mu_hat|={res['max_fourier_on_support']:.1e} "
        f"max|embed|={res['max_embed']:.1e} MMD2={m2:.1e} TV={tv:.3f} {dt:.1f}s")


# ---- 4

def test_criterion_4_denseness_discrimination():
    t0 = time.perf_counter()
    g = denseness_probe(DensenessProbeConfig(gaussian_ti(), (-1.0, 1.0), ("sin:3",),
                                             (5, 9, 17, 25), 401, 1e-10))
    tg = time.perf_counter() - t0
    eg = g.final_error("sin:3")
    t0 = time.perf_counter()
    c = denseness_probe(DensenessProbeConfig(cosine_ti(), (-1.0, 1.0), ("monomial:2",),
                                             (5, 9, 17, 25), 401, 1e-10))
    tc = time.perf_counter() - t0
    errs = c.errors("monomial:2")
    floor_rel = abs(errs[-1] - oracle.COSINE_FLOOR) / oracle.COSINE_FLOOR
    ok = (eg <= 1e-3 and tg < 10 and plateaus(errs, 1e-3) and floor_rel <= 0.05 and tc < 10)
    log(4, "denseness discrimination", ok,
        f"gaussian sup err={eg:.2e} (oracle {oracle.GAUSSIAN_DENSE_SIN3_25:.2e}) {tg:.2f}s; "
        f"cosine floor={errs[-1]:.6f} vs oracle {oracle.COSINE_FLOOR:.6f} rel={floor_rel:.1e} "
        f"plateau={plateaus(errs, 1e-3)} {tc:.2f}s")


# ---- 5

def test_criterion_5_muntz_parity_floor():
    rep = muntz_probe(IndexSupport("even"), 64, ["monomial:1"], horizons=range(1, 65))
    raw = [p.error for p in rep.curves["monomial:1"]]
    ok = min(raw) >= 1 - 1e-9
    log(5, "Muntz parity floor", ok, f"{len(raw)} horizons, min error={min(raw)!r}")


# ---- 6

def test_criterion_6_kernel_algebra():
    rng = np.random.default_rng(6)
    kernels = bundled_kernels()
    sym_ok = psd_ok = True
    worst_psd = 0.0
    for _ in range(50):
        pts = np.unique(rng.uniform(-4, 4, rng.integers(1, 51)))
        for K in kernels.values():
            G = gram(K, pts)
            sym_ok &= bool(np.array_equal(G, G.T))
            lam = np.linalg.eigvalsh(G).min()
            tr = np.trace(G)
            worst_psd = min(worst_psd, lam / tr if tr > 0 else 0.0)
            psd_ok &= bool(lam >= -1e-8 * tr)
    ti_res = 0.0
    for K in kernels.values():
        if isinstance(K, TranslationInvariant):
            x, y, a = rng.uniform(-5, 5, (3, 200))
            ti_res = max(ti_res, float(np.max(np.abs(evaluate(K, x + a, y + a) - evaluate(K, x, y)))))
    s = np.linspace(0, 5, 51)
    bochner = {n: float(np.max(np.abs(evaluate(gaussian_ti(grid=n), s, 0.0) - np.exp(-s**2 / 2))))
               for n in (201, 401, 801, 1601)}
    ok = sym_ok and psd_ok and ti_res <= 1e-10 and bochner[1601] <= 1e-8
    log(6, "kernel algebra", ok,
        f"{len(kernels)} kernels x 50 point sets, symmetric={sym_ok}, min eig/trace={worst_psd:.1e}, "
        f"TI residual={ti_res:.1e}, Bochner err by grid={ {k: f'{v:.0e}' for k, v in bochner.items()} }")


# ---- 7

def _random_measure(rng, with_density):
    n = rng.integers(1, 8)
    mu = SignedMeasure(rng.uniform(-5, 5, n), rng.normal(size=n))
    if with_density:
        grid = np.linspace(-3, 3, 61)
        mu = SignedMeasure(mu.locations, mu.masses, Density(grid, rng.normal(size=61)))
    return mu


def test_criterion_7_measure_algebra():
    rng = np.random.default_rng(7)
    hj_ok = True
    for i in range(200):
        mu = _random_measure(rng, i % 2 == 1)
        pos, neg = hahn_jordan(mu)
        back = pos - neg
        hj_ok &= bool(np.array_equal(back.masses, mu.masses)
                      and np.array_equal(back.locations, mu.locations))
        if mu.density is not None:
            hj_ok &= bool(np.array_equal(back.density.values, mu.density.values)
                          and np.all(pos.density.values * neg.density.values == 0))
        hj_ok &= not set(pos.locations.tolist()) & set(neg.locations.tolist())
        hj_ok &= total_variation(pos) + total_variation(neg) == pytest.approx(total_variation(mu),
                                                                              rel=1e-15)
    a = rng.uniform(-20, 20, 100)
    xi = rng.uniform(-20, 20, 100)
    f_err = max(abs(fourier(dirac(ai), xi) - np.exp(-1j * ai * xi)).max() for ai in a)
    rt = 0.0
    for i in range(200):
        mu = _random_measure(rng, i % 2 == 1)
        mu = mu - dirac(10.0, total_mass(mu))  # zero mass
        c, P, Q = to_probability_pair(mu)
        back = c * (P.as_signed() - Q.as_signed())
        t0, w0 = mu.nodes()
        t1, w1 = back.nodes()
        rt = max(rt, float(np.max(np.abs(w1 - w0)) / np.max(np.abs(w0))))
    ok = hj_ok and f_err <= 1e-14 and rt <= 1e-12
    log(7, "measure algebra", ok,
        f"Hahn-Jordan exact={hj_ok} on 200 measures, fourier(delta_a) err={f_err:.1e}, "
        f"probability pair round trip rel={rt:.1e}")


# ---- 8

def test_criterion_8_lemma_equivalence(witness):
    K, mu_w, _ = witness
    rng = np.random.default_rng(8)
    xi = K.spectral.sample_support(100, np.random.default_rng(0))
    x = np.linspace(-5, 5, 41)
    measures = [("witness", mu_w)]
    for i in range(20):
        n = rng.integers(2, 7)
        m = rng.normal(size=n)
        mu = SignedMeasure(rng.uniform(-3, 3, n), m - m.mean())
        if i % 4 == 3:
            grid = np.linspace(-4, 4, 161)
            mu = SignedMeasure(density=Density(grid, np.exp(-(grid - rng.uniform(-1, 1)) ** 2)
                                               - np.exp(-(grid - rng.uniform(-1, 1)) ** 2)))
        measures.append((f"control{i}", mu))
    rows, ok = [], True
    for name, mu in measures:
        fmax = float(np.max(np.abs(fourier(mu, xi))))
        emax = float(np.max(np.abs(embed(K, mu, x))))
        rows.append((name, fmax, emax))
        if (fmax <= 1e-6) != (emax <= 1e-5):
            ok = False
        if fmax > 1e-2 and not emax > 1e-3:
            ok = False
    small = [r for r in rows if r[1] <= 1e-6]
    big = [r for r in rows if r[1] > 1e-2]
    log(8, "embedding vanishes iff transform vanishes on supp nu", ok,
        f"{len(small)} vanishing (max|embed|={max(r[2] for r in small):.1e}), "
        f"{len(big)} controls with max|mu_hat|>1e-2 (min max|embed|={min(r[2] for r in big):.1e})")


# ---- 9

def test_criterion_9_determinism(tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        codes = [cli_main(["report", str(p), "--out", str(out), "--quiet"]) for p in CONFIGS]
        runs.append((codes, {f.name: f.read_bytes() for f in sorted(out.iterdir())}))
    (c0, f0), (c1, f1) = runs
    ok = c0 == c1 and f0 == f1 and len(f0) > 0
    log(9, "end-to-end determinism", ok,
        f"{len(CONFIGS)} configs, {len(f0)} files byte-identical={f0 == f1}, exit codes={sorted(set(c0))}")
