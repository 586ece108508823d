import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ofdm_pa import acf, closed_form as cf
from ofdm_pa.constellation import from_tag
from ofdm_pa.harness import Scenario, run_scenario
from ofdm_pa.waveform import PowerAllocation, random_pa, uniform_pa

from strategies import simplex_points

MU4_16QAM = 1.32


def test_pacf_uniform_levels():
    n = 64
    for mu4 in (1.0, 1.32, 1.7):
        np.testing.assert_allclose(cf.pacf_expected_sq(uniform_pa(n), mu4, np.arange(1, n)),
                                   (mu4 - 1) * n, atol=1e-9)
        assert cf.pacf_expected_sq(uniform_pa(n), mu4, 0) == pytest.approx((mu4 - 1) * n + n * n)


def test_pacf_concentrated_power_is_flat():
    n = 8
    pa = PowerAllocation(np.r_[n, np.zeros(n - 1)])
    np.testing.assert_allclose(cf.pacf_expected_sq(pa, 1.0, np.arange(n)), n * n)


def test_pacf_eisl_examples():
    n = 64
    assert cf.pacf_eisl(uniform_pa(n), MU4_16QAM) == pytest.approx(1290.24, abs=1e-9)
    assert cf.pacf_eisl(uniform_pa(n), MU4_16QAM) == pytest.approx((n - 1) * 0.32 * n, abs=1e-9)
    assert cf.pacf_eisl(uniform_pa(n), 1.0) == 0


@settings(max_examples=30)
@given(simplex_points(max_n=32), st.floats(1.0, 2.0))
def test_eisl_is_sum_of_lags(pa, mu4):
    per = cf.pacf_expected_sq(pa, mu4, np.arange(1, pa.n))
    assert per.sum() == pytest.approx(cf.pacf_eisl(pa, mu4), rel=1e-9, abs=1e-9)
    prof = cf.pacf_expected_profile(pa, mu4)
    np.testing.assert_allclose(prof[1:], per, rtol=1e-9, atol=1e-9)
    assert cf.pacf_normalized_eisl(pa, mu4) == pytest.approx(
        cf.pacf_eisl(pa, mu4) / cf.mainlobe(pa, mu4), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("mu4", [1.0, 1.32, 1.9])
def test_normalized_eisl_uniform_formula(mu4):
    n = 32
    assert cf.pacf_normalized_eisl(uniform_pa(n), mu4) == pytest.approx(
        n * mu4 / ((mu4 - 1) + n) - 1, abs=1e-12)


def test_lag_out_of_range():
    with pytest.raises(ValueError):
        cf.pacf_expected_sq(uniform_pa(4), 1.0, 4)
    with pytest.raises(ValueError):
        cf.zp_expected_sq(uniform_pa(4), 1.0, 8, 2)


@settings(max_examples=30)
@given(simplex_points(max_n=64))
def test_parseval(pa):
    n = pa.n
    af = np.abs(np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(1, n + 1)) / n) @ pa.p) ** 2
    assert af.sum() == pytest.approx(n * pa.sum_sq(), rel=1e-9)


@settings(max_examples=30)
@given(simplex_points(max_n=48).filter(lambda pa: pa.n % 2 == 0), st.floats(1.0, 2.0))
def test_half_range_bridges_zero_padding(pa, mu4):
    assert cf.pacf_eisl_half_range(pa, mu4) == pytest.approx(cf.zp_eisl(pa, mu4, 1), rel=1e-9,
                                                             abs=1e-9)


@pytest.mark.parametrize("n", [3, 5, 8, 17, 64])
def test_w_matrix_structure(n):
    w = cf.dft_product_matrix(n)
    assert w.shape == (n, 2 * n)
    np.testing.assert_allclose(w[:, 0::2], np.eye(n) / np.sqrt(2), atol=1e-12)
    np.testing.assert_allclose(np.linalg.svd(w[:, 1::2], compute_uv=False), 1 / np.sqrt(2),
                               atol=1e-12)
    np.testing.assert_allclose(w @ w.conj().T, np.eye(n), atol=1e-12)


@settings(max_examples=30)
@given(simplex_points(max_n=32))
def test_aacf_geometry_total_power(pa):
    g = cf.aacf_geometry(pa)
    assert np.sum(np.abs(g.v_columns) ** 2) == pytest.approx(pa.n, rel=1e-12)


@settings(max_examples=30)
@given(simplex_points(max_n=32), st.floats(1.0, 2.0))
def test_aacf_batch_matches_scalar(pa, mu4):
    assert cf.aacf_normalized_eisl_batch(pa.p, mu4)[0] == pytest.approx(
        cf.aacf_normalized_eisl(pa, mu4), rel=1e-10)
    assert cf.pacf_normalized_eisl_batch(pa.p, mu4)[0] == pytest.approx(
        cf.pacf_normalized_eisl(pa, mu4), rel=1e-10, abs=1e-12)
    assert cf.aacf_mainlobe(pa, mu4) == cf.mainlobe(pa, mu4)


@pytest.mark.parametrize("n", [4, 16, 64])
def test_aacf_uniform_formula(n):
    for mu4 in (1.0, 1.32):
        assert cf.aacf_uniform_normalized_eisl(n, mu4) == pytest.approx(
            cf.aacf_normalized_eisl(uniform_pa(n), mu4), rel=1e-12)


def test_zp_geometry():
    geo = cf.zp_geometry(64, 10)
    assert geo.G.shape == (64, 310)
    np.testing.assert_allclose(np.abs(geo.G), 1.0)
    with pytest.raises(ValueError):
        cf.ZpGeometry(3, 3)


def test_zp_uniform_two_routes():
    n, L = 64, 10
    geo = cf.zp_geometry(n, L)
    ones = np.ones(n)
    via_g = np.sum(np.abs(geo.G.conj().T @ ones) ** 2)
    k = np.arange(L, n * L // 2)
    via_lags = np.sum(np.abs(np.exp(2j * np.pi * np.outer(k, np.arange(1, n + 1)) / (n * L)).sum(1))
                      ** 2)
    assert via_g == pytest.approx(via_lags, rel=1e-9)
    assert cf.zp_eisl(uniform_pa(n), 1.0, L) == pytest.approx(via_lags, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(simplex_points(min_n=2, max_n=24), st.integers(1, 6), st.floats(1.0, 2.0))
def test_zp_eisl_sum_of_lags(pa, L, mu4):
    if (pa.n * L) % 2:
        L += 1
    lags = acf.sidelobe_lags(acf.ZERO_PADDED, pa.n, L)
    per = cf.zp_expected_sq(pa, mu4, lags, L) if lags.size else np.zeros(0)
    assert per.sum() == pytest.approx(cf.zp_eisl(pa, mu4, L), rel=1e-9, abs=1e-9)
    assert cf.zp_expected_sq(pa, mu4, 0, L) == pytest.approx(cf.mainlobe(pa, mu4))
    prof = cf.zp_expected_profile(pa, mu4, L)
    np.testing.assert_allclose(prof, cf.zp_expected_sq(pa, mu4, np.arange(pa.n * L), L),
                               rtol=1e-9, atol=1e-9)


def test_zp_gradient_real_finite_and_tangent_consistent():
    n, L = 16, 4
    for p in (np.ones(n), random_pa(n, 0).p):
        g = cf.zp_gradient(p, 1.32, L)
        assert g.dtype == float and np.all(np.isfinite(g))
        d = np.random.default_rng(1).normal(size=n)
        h = 1e-6
        fd = (cf.zp_objective(p + h * d, 1.32, L) - cf.zp_objective(p - h * d, 1.32, L)) / (2 * h)
        assert g @ d == pytest.approx(fd, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("tag", ["qpsk", "16qam"])
@pytest.mark.parametrize("n", [16, 64])
@pytest.mark.parametrize("scheme", ["uniform", "random"])
@pytest.mark.parametrize("kind", [acf.PERIODIC, acf.APERIODIC, acf.ZERO_PADDED])
def test_montecarlo_agreement(tag, n, scheme, kind):
    L = 4 if kind == acf.ZERO_PADDED else 1
    res = run_scenario(Scenario(tag, n, scheme, pad_factor=L, trials=1000, base_seed=10,
                                acf_kind=kind))
    if kind != acf.APERIODIC:
        tol = 4 * res.stderr + 1e-9 * res.theory[0]
        assert np.all(np.abs(res.empirical - res.theory) <= tol)
    for metric in ("mainlobe", "eisl", "normalized_eisl"):
        row = next(r for r in res.summary if r["metric"] == metric)
        assert abs(row["empirical"] - row["theory"]) <= 4 * row["stderr"] + 1e-9 * abs(row["theory"])


@pytest.mark.parametrize("tag", ["16psk", "16qam", "64qam"])
def test_theorem_sweeps(tag):
    mu4 = from_tag(tag).mu4
    n = 16
    rows = n * np.random.default_rng(5).dirichlet(np.ones(n), size=10_000)
    one = np.ones((1, n))
    assert np.all(cf.pacf_normalized_eisl_batch(rows, mu4) > cf.pacf_normalized_eisl_batch(one, mu4))
    assert np.all(cf.pacf_normalized_sidelobes_batch(rows, mu4)
                  > cf.pacf_normalized_sidelobes_batch(one, mu4))
    assert np.all(cf.aacf_normalized_eisl_batch(rows, mu4) > cf.aacf_normalized_eisl_batch(one, mu4))


def test_theory_rows():
    rows = cf.theory_rows(cf.pacf_expected_profile(uniform_pa(4), 1.32))
    assert list(rows[0]) == ["lag", "expected_mag_sq", "expected_mag_db_normalized"]
    assert rows[0]["expected_mag_db_normalized"] == 0.0
