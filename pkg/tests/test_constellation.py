import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ofdm_pa.constellation import (
    ConstellationError,
    Constellation,
    from_tag,
    make_psk,
    make_qam,
    sample_symbols,
)


@pytest.mark.parametrize("order", [4, 8, 16, 32, 64])
def test_psk_moments(order):
    c = make_psk(order)
    assert c.order == order
    assert c.mu4 == 1.0
    assert abs(c.points.sum()) < 1e-12
    np.testing.assert_allclose(np.abs(c.points), 1.0)


@pytest.mark.parametrize("order,mu4", [(16, 1.32), (64, 1.380952380952381)])
def test_qam_kurtosis_matches_enumeration(order, mu4):
    c = make_qam(order)
    side = int(np.sqrt(order))
    levels = np.arange(-(side - 1), side, 2)
    grid = (levels[:, None] + 1j * levels[None, :]).ravel()
    grid = grid / np.sqrt(np.mean(np.abs(grid) ** 2))
    assert c.mu4 == pytest.approx(np.mean(np.abs(grid) ** 4), abs=1e-12)
    assert c.mu4 == pytest.approx(mu4, abs=1e-12)


@pytest.mark.parametrize("c", [make_psk(4), make_psk(16), make_qam(16), make_qam(64), make_qam(256)])
def test_assumption_one(c):
    assert abs(np.mean(c.points)) < 1e-12
    assert abs(np.mean(c.points**2)) < 1e-12
    assert abs(np.mean(np.abs(c.points) ** 2) - 1) < 1e-12
    assert 1 <= c.mu4 <= 2


@pytest.mark.parametrize("bad", [2, 3, 6, 128 + 1])
def test_psk_rejects(bad):
    with pytest.raises(ConstellationError):
        make_psk(bad)


def test_bpsk_message_mentions_pseudo_variance():
    with pytest.raises(ConstellationError, match="pseudo-variance"):
        make_psk(2)


@pytest.mark.parametrize("bad", [8, 12, 32, 4 * 4 + 1])
def test_qam_rejects(bad):
    with pytest.raises(ConstellationError):
        make_qam(bad)


def test_constellation_rejects_nonzero_mean():
    with pytest.raises(ConstellationError):
        Constellation("shifted", np.array([1 + 0j, 1j, -1j, 1 + 1j]) / 1.0, 1.0)


@pytest.mark.parametrize("tag,name", [("qpsk", "4psk"), ("16qam", "16qam"), ("16-PSK", "16psk"),
                                      ("64qam", "64qam")])
def test_from_tag(tag, name):
    assert from_tag(tag).name == name


@pytest.mark.parametrize("tag", ["", "qam", "bpsk", "8qam", "16fsk"])
def test_from_tag_rejects(tag):
    with pytest.raises(ConstellationError):
        from_tag(tag)


def test_sample_determinism():
    c = make_psk(4)
    np.testing.assert_array_equal(sample_symbols(c, 4, 7), sample_symbols(c, 4, 7))


def test_sample_power_and_fourth_moment():
    s = sample_symbols(make_psk(4), 100_000, 1)
    assert abs(np.mean(np.abs(s) ** 2) - 1) < 0.02
    c = make_qam(16)
    s = sample_symbols(c, 100_000, 1)
    assert abs(np.mean(np.abs(s) ** 4) - 1.32) < 0.03


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), tag=st.sampled_from(["16qam", "64qam"]))
def test_sample_fourth_moment_three_sigma(seed, tag):
    c = from_tag(tag)
    n = 20_000
    s4 = np.abs(sample_symbols(c, n, seed)) ** 4
    sigma = np.std(np.abs(c.points) ** 4) / np.sqrt(n)
    # 3 sigma per draw, with a little room since hypothesis tries many seeds
    assert abs(s4.mean() - c.mu4) < 4 * sigma


@given(st.integers(1, 64), st.integers(0, 1000))
def test_samples_come_from_constellation(n, seed):
    c = make_qam(16)
    s = sample_symbols(c, n, seed)
    assert s.shape == (n,)
    assert np.all(np.min(np.abs(s[:, None] - c.points[None, :]), axis=1) < 1e-15)


def test_sample_rejects_empty():
    with pytest.raises(ValueError):
        sample_symbols(make_psk(4), 0, 0)
