"""Per-window Doppler shift estimation.

Two spectral estimators share one periodogram (Hann window, 4x zero
padding): the peak of the spectrum for a direct-path signal, and the
power-weighted centroid of the dispersive spectrum when only scattered
paths arrive. Which one is used is decided from the received power
relative to the strongest receiver in the fleet.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

CLAMP_EPS = 1e-3
LOW_INFO_F = 0.02
ZERO_PAD = 4
CENTROID_MARGIN_DB = 6.0
REFINE_SIGNIFICANCE = 3.0


class Mode(str, enum.Enum):
    LOS_PEAK = "LOS-peak"
    NLOS_CENTROID = "NLOS-centroid"


class NoSignalError(RuntimeError):
    """No spectral bin rose above the detection threshold."""


@dataclass(frozen=True)
class DopplerSample:
    t: float
    f_d_hat: float
    normalized_F: float
    power: float
    mode_used: Mode
    f_dmax: float
    segment_index: int = 0

    @property
    def usable(self) -> bool:
        """False for samples too close to F = 0 to pair (A(t) diverges there)."""
        return abs(self.normalized_F) >= LOW_INFO_F


def periodogram(samples, sample_rate: float, pad: int = ZERO_PAD):
    """Hann-windowed, zero-padded periodogram.

    Returns
    -------
    freqs : ndarray
        Bin frequencies in Hz, ascending, centered on zero.
    psd : ndarray
        Squared magnitude per bin (arbitrary scale).
    """
    x = np.asarray(samples)
    n = len(x)
    n_fft = pad * n
    spec = np.fft.fftshift(np.fft.fft(x * np.hanning(n + 2)[1:-1], n_fft))
    freqs = np.fft.fftshift(np.fft.fftfreq(n_fft, d=1.0 / sample_rate))
    return freqs, np.abs(spec) ** 2


def peak_frequency(freqs, psd) -> float:
    """Spectral peak refined by a parabola through the log-power of three bins."""
    k = int(np.argmax(psd))
    df = freqs[1] - freqs[0]
    if 0 < k < len(psd) - 1 and np.all(psd[k - 1 : k + 2] > 0):
        a, b, g = np.log(psd[k - 1 : k + 2])
        denom = a - 2.0 * b + g
        p = 0.5 * (a - g) / denom if denom != 0 else 0.0
    else:
        p = 0.0
    return float(freqs[k] + p * df)


def refine_center_frequency(samples, sample_rate: float, f_coarse: float, block: int = 8):
    """Instantaneous frequency at the window midpoint from a cubic phase fit.

    The spectral peak is an average of the instantaneous frequency over the
    window, so a curved Doppler track biases it. The signal is mixed down by
    ``f_coarse``, block-averaged, and its unwrapped phase fitted with a cubic
    in time centered on the midpoint; the linear term is the frequency offset.

    Returns
    -------
    (f_refined, std_err) : tuple of float
        ``std_err`` is the least-squares standard error of ``f_refined``;
        ``inf`` when the fit is not possible.
    """
    x = np.asarray(samples)
    n = len(x)
    tau = (np.arange(n) - 0.5 * (n - 1)) / sample_rate
    y = x * np.exp(-2j * np.pi * f_coarse * tau)
    m = n // block
    if m < 8:
        return f_coarse, math.inf
    off = (n - m * block) // 2
    yb = y[off : off + m * block].reshape(m, block).mean(axis=1)
    tb = tau[off : off + m * block].reshape(m, block).mean(axis=1)
    mag = np.abs(yb)
    if not np.all(mag > 0):
        return f_coarse, math.inf
    phase = np.unwrap(np.angle(yb))
    coef, cov = np.polyfit(tb, phase, 3, w=mag / mag.max(), cov="unscaled")
    resid = phase - np.polyval(coef, tb)
    w2 = (mag / mag.max()) ** 2
    dof = max(m - 4, 1)
    sigma2 = float(np.sum(w2 * resid**2) / dof)
    std = math.sqrt(max(cov[-2, -2] * sigma2, 0.0)) / (2.0 * np.pi)
    return float(f_coarse + coef[-2] / (2.0 * np.pi)), std


def centroid_frequency(freqs, psd, f_dmax: float, margin_db: float = CENTROID_MARGIN_DB) -> float:
    """Power-weighted centroid of bins above ``median + margin_db`` within ``±f_dmax``."""
    threshold = np.median(psd) * 10.0 ** (margin_db / 10.0)
    sel = (np.abs(freqs) <= f_dmax) & (psd > threshold)
    if not np.any(sel):
        raise NoSignalError("no spectral bin above the detection threshold")
    w = psd[sel]
    return float(np.sum(w * freqs[sel]) / np.sum(w))


def normalize(f_d_hat: float, f_dmax: float, eps: float = CLAMP_EPS) -> float:
    lim = 1.0 - eps
    return float(min(max(f_d_hat / f_dmax, -lim), lim))


def select_mode(power: float, fleet_max_power: float, los_threshold_db: float) -> Mode:
    """LOS-peak when ``power`` is within ``los_threshold_db`` of the fleet maximum."""
    if power >= fleet_max_power - los_threshold_db:
        return Mode.LOS_PEAK
    return Mode.NLOS_CENTROID


def estimate_dfs(window, f_dmax: float, mode=Mode.LOS_PEAK) -> DopplerSample:
    """Estimate one Doppler shift from a received window.

    Parameters
    ----------
    window : ReceivedWindow
    f_dmax : float
        Maximum possible Doppler shift for this pass, Hz.
    mode : Mode
        Spectral statistic to use.

    Raises
    ------
    NoSignalError
        Centroid mode found nothing above the threshold.
    ValueError
        Short window, non-positive ``f_dmax`` or non-finite samples.
    """
    x = np.asarray(window.samples)
    if len(x) < 64:
        raise ValueError(f"window has {len(x)} samples, need at least 64")
    if not f_dmax > 0:
        raise ValueError("f_dmax must be positive")
    if not np.all(np.isfinite(x)):
        raise ValueError("window contains non-finite samples")
    mode = Mode(mode)
    freqs, psd = periodogram(x, window.sample_rate)
    if mode is Mode.LOS_PEAK:
        f_hat = peak_frequency(freqs, psd)
        f_ref, std = refine_center_frequency(x, window.sample_rate, f_hat)
        shift = abs(f_ref - f_hat)
        # keep the lower-variance peak unless the curvature bias clearly dominates noise
        if shift > REFINE_SIGNIFICANCE * std and shift < 0.5 * window.sample_rate / len(x):
            f_hat = f_ref
    else:
        f_hat = centroid_frequency(freqs, psd, f_dmax)
    return DopplerSample(
        t=window.t_start + 0.5 * len(x) / window.sample_rate,
        f_d_hat=f_hat,
        normalized_F=normalize(f_hat, f_dmax),
        power=window.received_power,
        mode_used=mode,
        f_dmax=float(f_dmax),
        segment_index=getattr(window, "segment_index", 0),
    )


def spectral_spread(samples, sample_rate: float) -> float:
    """Second central moment of the periodogram, Hz^2."""
    freqs, psd = periodogram(samples, sample_rate)
    w = psd / psd.sum()
    mean = np.sum(w * freqs)
    return float(np.sum(w * (freqs - mean) ** 2))

