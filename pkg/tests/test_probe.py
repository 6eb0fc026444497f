import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from univkern.errors import (
    GapContainsZero,
    GapIntersectsSupport,
    ProbeError,
    SingularSystem,
)
from univkern.families import band_ti, constant_ti, cosine_ti, gaussian_ti, sinc_ti
from univkern.kernels import IndexSupport, embed
from univkern.measures import dirac, fourier
from univkern.probe import (
    CSV_COLUMNS,
    DensenessProbeConfig,
    MeasurePair,
    denseness_probe,
    exponential_completeness_probe,
    mmd_injectivity_probe,
    muntz_probe,
    nested_centers,
    parse_target,
    plateaus,
    witness_gap_measure,
    witness_pair,
    witness_residuals,
)

from strategies import zero_mass_measures

# two-function least-squares floor for x^2 by span{cos x, sin x} on 401 points of [-1, 1]
COSINE_FLOOR = 0.821531311061784


@pytest.fixture(scope="module")
def band_witness():
    K = band_ti()
    return K, witness_gap_measure(K.spectral, (0.25, 0.75))


def test_targets():
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(parse_target("sin:3")(x), np.sin(3 * x))
    np.testing.assert_allclose(parse_target("poly:1,0,2")(x), 1 + 2 * x**2)
    np.testing.assert_allclose(parse_target("const:2")(x), 2.0)
    np.testing.assert_allclose(parse_target("monomial:3")(x), x**3)
    for bad in ("foo:1", "sin:x", "monomial:1.5"):
        with pytest.raises(ProbeError):
            parse_target(bad)


@given(st.integers(1, 70), st.integers(1, 70))
def test_nested_centers_prefix(n, m):
    a, b = sorted((n, m))
    big = nested_centers(-1, 1, b)
    np.testing.assert_array_equal(nested_centers(-1, 1, a), big[:a])
    assert np.unique(big).size == b


def test_nested_centers_equispaced_at_dyadic_counts():
    for k in range(5):
        n = 2**k + 1
        np.testing.assert_allclose(np.sort(nested_centers(-1, 1, n)), np.linspace(-1, 1, n),
                                   atol=1e-15)


def test_plateau_rule():
    assert plateaus([0.9, 0.82, 0.81, 0.80], 1e-3)
    assert not plateaus([0.9, 0.5, 0.25], 1e-3)
    assert not plateaus([1e-3, 1e-3, 1e-3], 1e-3)  # converged, not a plateau
    assert not plateaus([0.8, 0.8], 1e-3)


def test_constant_kernel_error_one():
    rep = denseness_probe(DensenessProbeConfig(constant_ti(), targets=("monomial:1",),
                                               center_counts=(1, 2, 3, 5, 9)))
    for p in rep.curves["monomial:1"]:
        assert p.error == pytest.approx(1.0, abs=1e-12)


def test_gaussian_converges():
    rep = denseness_probe(DensenessProbeConfig(gaussian_ti(), targets=("sin:3",),
                                               center_counts=(5, 9, 17, 25)))
    assert rep.final_error("sin:3") <= 1e-3
    assert rep.flags["sin:3:converged"]


def test_cosine_plateau_at_two_basis_floor():
    rep = denseness_probe(DensenessProbeConfig(cosine_ti(), targets=("monomial:2",),
                                               center_counts=(5, 9, 17, 25)))
    assert rep.flags["monomial:2:plateau"]
    assert rep.final_error("monomial:2") == pytest.approx(COSINE_FLOOR, rel=0.05)


@pytest.mark.parametrize("K", [gaussian_ti(), cosine_ti(), sinc_ti(), band_ti()])
def test_curves_monotone(K):
    rep = denseness_probe(DensenessProbeConfig(K, targets=("sin:3", "monomial:2"),
                                               center_counts=(2, 3, 5, 9, 17, 33)))
    for t in rep.curves:
        errs = rep.errors(t)
        assert all(b <= a + 1e-10 for a, b in zip(errs, errs[1:]))
        assert all(e >= 0 for e in errs)


def test_singular_without_ridge():
    with pytest.raises(SingularSystem):
        denseness_probe(DensenessProbeConfig(cosine_ti(), targets=("monomial:2",),
                                             center_counts=(5,), ridge=0.0))


def test_config_validation():
    with pytest.raises(ProbeError):
        DensenessProbeConfig(gaussian_ti(), interval=(1.0, -1.0))
    with pytest.raises(ProbeError):
        DensenessProbeConfig(gaussian_ti(), center_counts=(5, 5))
    with pytest.raises(ProbeError):
        DensenessProbeConfig(gaussian_ti(), ridge=-1.0)


def test_witness_errors():
    with pytest.raises(GapIntersectsSupport):
        witness_gap_measure(gaussian_ti().spectral, (0.25, 0.75))
    with pytest.raises(GapContainsZero):
        witness_gap_measure(band_ti().spectral, (-0.5, 0.5))
    with pytest.raises(GapIntersectsSupport):
        witness_gap_measure(band_ti().spectral, (0.5, 1.5))
    with pytest.raises(ProbeError):
        # step 2T/(n-1) = 3 aliases the bump band onto [1, 2]
        witness_gap_measure(band_ti().spectral, (0.25, 0.75), truncation=1500, grid_size=1001)


def test_witness_soundness(band_witness):
    K, mu = band_witness
    res = witness_residuals(K, mu)
    assert res["total_mass"] <= 1e-8
    assert res["max_fourier_on_support"] <= 1e-6
    assert res["max_embed"] <= 1e-6


def test_witness_even_density(band_witness):
    _, mu = band_witness
    v = mu.density.values
    np.testing.assert_allclose(v, v[::-1], atol=1e-15)


def test_witness_pair_mmd(band_witness):
    K, mu = band_witness
    rep = mmd_injectivity_probe(K, [witness_pair(mu)])
    row = rep.table[0]
    assert row["mmd2"] <= 1e-8 and row["total_variation"] >= 0.1
    assert rep.flags["witness:annihilated"]


def test_mmd_table_gaussian():
    rep = mmd_injectivity_probe(gaussian_ti(), [MeasurePair("d", dirac(0.0), dirac(1.0)),
                                                MeasurePair("same", dirac(0.0), dirac(0.0))])
    assert rep.table[0]["mmd2"] == pytest.approx(2 - 2 * math.exp(-0.5), abs=1e-12)
    assert rep.table[0]["total_variation"] == 2.0
    assert rep.table[1]["mmd2"] == 0.0 and rep.table[1]["total_variation"] == 0.0
    assert rep.passed


@given(zero_mass_measures())
def test_lemma_direction_control(mu):
    # a measure whose transform is large somewhere on supp nu must have a visible embedding
    K = band_ti()
    xi = np.linspace(1, 2, 201)
    fmax = np.max(np.abs(fourier(mu, xi)))
    emax = np.max(np.abs(embed(K, mu, np.linspace(-5, 5, 41))))
    if fmax > 1e-2:
        assert emax > 0


def test_exponential_probe_examples():
    rep = exponential_completeness_probe([1.0], 1.0, ["monomial:2"])
    assert rep.final_error("monomial:2") == pytest.approx(COSINE_FLOOR, rel=1e-6)
    rep = exponential_completeness_probe([0.0], 1.0, ["const:1"])
    assert rep.final_error("const:1") <= 1e-8
    n = np.arange(1, 61)
    rep = exponential_completeness_probe(n / np.log(n + 1), 3.0, ["monomial:2"],
                                         counts=[5, 10, 20, 40, 60])
    assert rep.final_error("monomial:2") < 1e-2
    with pytest.raises(ProbeError):
        exponential_completeness_probe([1.0, 1.0], 1.0, ["monomial:2"])


def test_muntz_probe_examples():
    even = muntz_probe(IndexSupport("even"), 64, ["monomial:1"])
    assert min(p.error for p in even.curves["monomial:1"]) >= 1 - 1e-9
    full = muntz_probe(IndexSupport("full"), 20, ["sinsq:2"])
    assert full.final_error("sinsq:2") < 1e-2
    lac = muntz_probe(IndexSupport("lacunary", base=2), 64, ["monomial:3"])
    assert all(p.error > 0.39 for p in lac.curves["monomial:3"])
    assert lac.flags["monomial:3:plateau"]


def test_csv_export():
    rep = muntz_probe(IndexSupport("full"), 4, ["monomial:2"])
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("1,monomial:2,")
    assert len(lines) == 1 + len(rep.curves["monomial:2"])


def test_report_deterministic():
    cfg = DensenessProbeConfig(gaussian_ti(), targets=("sin:3",), center_counts=(3, 5))
    assert denseness_probe(cfg).to_dict() == denseness_probe(cfg).to_dict()
