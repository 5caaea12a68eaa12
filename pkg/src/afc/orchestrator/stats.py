"""Time-series statistics: mean, deviation, and Strouhal peak extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from afc.errors import ConfigError

#: A spectral maximum must stand this far above the median power to count as
#: a shedding peak rather than broadband noise.
PEAK_OVER_MEDIAN = 20.0


@dataclass
class SignalStats:
    mean: float
    sigma: float
    st: float           # nan when no peak was detected
    has_peak: bool
    freq: np.ndarray    # spectrum axis in St units
    power: np.ndarray


def resample_uniform(t: np.ndarray, x: np.ndarray, dt: float):
    """Linear resampling onto a uniform grid (FFT needs equal spacing)."""
    grid = np.arange(t[0], t[-1] + 0.5 * dt, dt)
    return grid, np.interp(grid, t, x)


def signal_statistics(series: np.ndarray, dt: float, min_samples: int = 64) -> SignalStats:
    """Mean, population sigma, and the dominant nondimensional frequency.

    The Strouhal number comes from the peak of the Hann-windowed power
    spectrum refined by quadratic interpolation on log power. A constant or
    noise-dominated series is flagged has_peak=False with st=nan.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < min_samples:
        raise ConfigError(f"series too short for statistics: {x.size} < {min_samples}")
    mean = float(x.mean())
    sigma = float(x.std())

    win = np.hanning(x.size)
    power = np.abs(np.fft.rfft((x - mean) * win)) ** 2
    freq = np.fft.rfftfreq(x.size, dt)
    if power.size < 4 or sigma == 0.0:
        return SignalStats(mean, sigma, float("nan"), False, freq, power)

    k = int(np.argmax(power[1:])) + 1
    floor = float(np.median(power[1:]))
    if power[k] < PEAK_OVER_MEDIAN * floor or power[k] <= 0.0:
        return SignalStats(mean, sigma, float("nan"), False, freq, power)

    st = freq[k]
    if 1 <= k < power.size - 1 and power[k - 1] > 0 and power[k + 1] > 0:
        la, lb, lc = np.log(power[k - 1 : k + 2])
        denom = la - 2.0 * lb + lc
        if denom < 0:
            delta = 0.5 * (la - lc) / denom
            st = (k + float(np.clip(delta, -0.5, 0.5))) * freq[1]
    return SignalStats(mean, sigma, float(st), True, freq, power)


def spectral_peaks(stats: SignalStats, max_peaks: int = 4) -> list[tuple[float, float]]:
    """Local spectrum maxima as (st, power), strongest first."""
    p = stats.power
    out = []
    for k in range(1, p.size - 1):
        if p[k] > p[k - 1] and p[k] >= p[k + 1]:
            out.append((float(stats.freq[k]), float(p[k])))
    out.sort(key=lambda kp: -kp[1])
    return out[:max_peaks]
