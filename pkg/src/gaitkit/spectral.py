"""One-sided periodogram of a 250-sample window axis and the sub-5 Hz
spectral statistics built on it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import SAMPLE_RATE
from .errors import ShapeError

WINDOW_LEN = 250
BAND_HZ = 5.0
# bins whose power is below this fraction of the spectrum maximum are FFT
# round-off, not signal; zeroing them keeps peak detection from firing on noise
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class Psd:
    bin_freqs: np.ndarray
    power: np.ndarray

    @property
    def df(self) -> float:
        return float(self.bin_freqs[1] - self.bin_freqs[0])

    def band_limit(self, f_hi: float = BAND_HZ) -> int:
        """Index of the last bin with frequency <= ``f_hi``."""
        return int(np.floor(f_hi / self.df + 1e-9))


@dataclass(frozen=True)
class SpectralPeaks:
    peaks: list  # [(freq, amp)] in ascending frequency
    peak_freq: float
    num_peaks: int
    integ_spec: float

    def first_two(self) -> tuple:
        """((x1, y1), (x2, y2)) with (0, 0) for missing peaks."""
        padded = list(self.peaks[:2]) + [(0.0, 0.0)] * (2 - min(2, len(self.peaks)))
        return padded[0], padded[1]


def psd(axis_samples, sample_rate: float = SAMPLE_RATE, n: int = WINDOW_LEN) -> Psd:
    """Raw one-sided periodogram of the mean-subtracted window.

    power_k = c_k |X_k|^2 / (N fs), c = 1 at DC and Nyquist, 2 elsewhere, so
    that sum(power) * df equals the mean square of the centred samples.
    """
    x = np.asarray(axis_samples, dtype=float)
    if x.shape != (n,):
        raise ShapeError(f"expected {n} samples, got shape {x.shape}")
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    if np.ptp(x) == 0:
        return Psd(freqs, np.zeros(len(freqs)))
    spec = np.fft.rfft(x - x.mean())
    power = np.abs(spec) ** 2 / (n * sample_rate)
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    power[power < NOISE_FLOOR * power.max()] = 0.0
    return Psd(freqs, power)


def median_frequency(p: Psd) -> tuple:
    """Smallest bin frequency at which cumulative power reaches half the total.

    Returns ``(mf, degenerate)``; a zero-power spectrum gives ``(0.0, True)``.
    """
    cum = np.cumsum(p.power)
    # total taken from the same running sum so exact half-power ties resolve consistently
    total = cum[-1]
    if total <= 0:
        return 0.0, True
    k = int(np.argmax(cum >= 0.5 * total))
    return float(p.bin_freqs[k]), False


def find_peaks(p: Psd, f_hi: float = BAND_HZ) -> SpectralPeaks:
    kmax = p.band_limit(f_hi)
    pw = p.power
    peaks = []
    for k in range(1, kmax + 1):
        right = pw[k + 1] if k + 1 < len(pw) else -np.inf
        if pw[k] > pw[k - 1] and pw[k] > right:
            peaks.append((float(p.bin_freqs[k]), float(pw[k])))
    band = pw[1:kmax + 1]
    peak_freq = float(p.bin_freqs[1 + int(np.argmax(band))]) if band.max() > 0 else 0.0
    return SpectralPeaks(peaks, peak_freq, len(peaks), integrate_spectrum(p, f_hi))


def integrate_spectrum(p: Psd, f_hi: float = BAND_HZ) -> float:
    """Rectangle-rule integral of the PSD over bins 0..f_hi inclusive."""
    return float(p.power[:p.band_limit(f_hi) + 1].sum() * p.df)
