import numpy as np
import pytest

from afc.errors import ConfigError
from afc.orchestrator.stats import resample_uniform, signal_statistics, spectral_peaks


def test_pure_sinusoid():
    dt = 0.05
    t = np.arange(0.0, 200.0, dt)
    x = np.sin(2 * np.pi * 0.17 * t)
    s = signal_statistics(x, dt)
    assert s.has_peak
    assert s.st == pytest.approx(0.170, abs=1e-3)
    assert s.mean == pytest.approx(0.0, abs=1e-3)
    assert s.sigma == pytest.approx(np.sqrt(0.5), abs=1e-3)


def test_constant_series_flagged_no_peak():
    s = signal_statistics(np.full(500, 2.5), 0.05)
    assert s.sigma == 0.0
    assert not s.has_peak
    assert np.isnan(s.st)


def test_harmonic_detected():
    dt = 0.05
    t = np.arange(0.0, 300.0, dt)
    x = np.sin(2 * np.pi * 0.16 * t) + 0.3 * np.sin(2 * np.pi * 0.32 * t)
    s = signal_statistics(x, dt)
    assert s.st == pytest.approx(0.16, abs=2e-3)
    peaks = spectral_peaks(s, max_peaks=2)
    assert peaks[0][0] == pytest.approx(0.16, abs=2e-3)
    assert peaks[1][0] == pytest.approx(0.32, abs=4e-3)


def test_short_series_rejected():
    with pytest.raises(ConfigError):
        signal_statistics(np.zeros(10), 0.05)


def test_resample_uniform_linear():
    t = np.array([0.0, 1.0, 3.0])
    x = np.array([0.0, 2.0, 6.0])
    grid, xr = resample_uniform(t, x, 0.5)
    np.testing.assert_allclose(grid, [0, 0.5, 1, 1.5, 2, 2.5, 3])
    np.testing.assert_allclose(xr, [0, 1, 2, 3, 4, 5, 6])


def test_noise_is_not_a_peak(rng):
    s = signal_statistics(rng.normal(size=4096), 0.05)
    assert not s.has_peak
