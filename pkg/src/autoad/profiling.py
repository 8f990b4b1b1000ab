"""Batch profiling of a prepared series.

Produces the :class:`DataProfile` that downstream modeling consumes:
change points, trend changes, differencing order, skewness and the
log-scale recommendation, and the dominant spectral frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SeriesTooShort
from .series import TimeSeries
from .stats import EPS_VAR, lag1_autocorr, skewness

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ProfileOptions:
    """Knobs for the profiling pass; defaults suit hourly/daily metrics."""

    change_penalty: Optional[float] = None  # None -> 3 ln(n)
    min_segment: int = 5
    trend_window: int = 24
    trend_slope_z: float = 4.0
    max_diff_order: int = 2
    l_max: int = 3
    noise_floor_multiplier: float = 10.0
    skew_threshold: float = 1.5


@dataclass(frozen=True)
class DataProfile:
    change_points: tuple[int, ...] = ()
    trend_changes: tuple[int, ...] = ()
    diff_order: int = 0
    skewness: float = 0.0
    log_recommended: bool = False
    fourier_terms: tuple[tuple[float, float], ...] = ()
    missing_fraction: float = 0.0

    def to_dict(self) -> dict:
        return {
            "change_points": list(self.change_points),
            "trend_changes": list(self.trend_changes),
            "diff_order": self.diff_order,
            "skewness": self.skewness,
            "log_recommended": self.log_recommended,
            "fourier_terms": [[f, p] for f, p in self.fourier_terms],
            "missing_fraction": self.missing_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DataProfile":
        return cls(
            change_points=tuple(data.get("change_points", ())),
            trend_changes=tuple(data.get("trend_changes", ())),
            diff_order=int(data.get("diff_order", 0)),
            skewness=float(data.get("skewness", 0.0)),
            log_recommended=bool(data.get("log_recommended", False)),
            fourier_terms=tuple((float(f), float(p)) for f, p in data.get("fourier_terms", ())),
            missing_fraction=float(data.get("missing_fraction", 0.0)),
        )


# -- change points ---------------------------------------------------------


def _segment_cost(d_sum, d_sq, lo: int, hi: int) -> float:
    """Gaussian -2 log-likelihood of the diff slice d[lo:hi] (exclusive)."""
    m = hi - lo
    if m <= 0:
        return 0.0
    s = d_sum[hi] - d_sum[lo]
    sq = d_sq[hi] - d_sq[lo]
    var = max(sq / m - (s / m) ** 2, EPS_VAR)
    return m * (_LOG_2PI + 1.0 + math.log(var))


def detect_change_points(
    ts: TimeSeries, penalty: Optional[float] = None, min_segment: int = 5
) -> list[int]:
    """Level/variance change points by penalized binary segmentation.

    Each segment is costed on its internal first differences, so a split
    at a jump removes the jump's diff from the likelihood while smooth
    trends contribute nothing a split could explain.  A split is accepted
    when it improves total cost by more than ``penalty`` (default 3 ln n).
    """
    values = ts.values
    n = values.size
    if min_segment < 2:
        raise ValueError("min_segment must be at least 2")
    if n < 2 * min_segment:
        raise SeriesTooShort(f"need at least {2 * min_segment} points, got {n}")
    if penalty is None:
        penalty = 3.0 * math.log(n)

    diffs = np.diff(values)
    d_sum = np.concatenate([[0.0], np.cumsum(diffs)])
    d_sq = np.concatenate([[0.0], np.cumsum(diffs**2)])

    def seg_cost(s: int, e: int) -> float:
        # values[s:e] has internal diffs diffs[s:e-1]
        return _segment_cost(d_sum, d_sq, s, e - 1)

    def split_costs(s: int, e: int, ks: np.ndarray) -> np.ndarray:
        m_l = ks - 1 - s
        m_r = e - 1 - ks
        sum_l = d_sum[ks - 1] - d_sum[s]
        sq_l = d_sq[ks - 1] - d_sq[s]
        sum_r = d_sum[e - 1] - d_sum[ks]
        sq_r = d_sq[e - 1] - d_sq[ks]
        var_l = np.maximum(sq_l / m_l - (sum_l / m_l) ** 2, EPS_VAR)
        var_r = np.maximum(sq_r / m_r - (sum_r / m_r) ** 2, EPS_VAR)
        return m_l * (_LOG_2PI + 1.0 + np.log(var_l)) + m_r * (
            _LOG_2PI + 1.0 + np.log(var_r)
        )

    change_points: list[int] = []

    def recurse(s: int, e: int) -> None:
        if e - s < 2 * min_segment:
            return
        parent = seg_cost(s, e)
        ks = np.arange(s + min_segment, e - min_segment + 1)
        gains = parent - split_costs(s, e, ks)
        best = int(np.argmax(gains))
        if gains[best] > penalty:
            k = int(ks[best])
            change_points.append(k)
            recurse(s, k)
            recurse(k, e)

    recurse(0, n)
    return sorted(change_points)


# -- trend changes -----------------------------------------------------------


def _rolling_slopes(values: np.ndarray, w: int):
    """Slope and slope-stderr of every length-w window (vectorized)."""
    n = values.size
    t_bar = (w - 1) / 2.0
    sxx = w * (w * w - 1) / 12.0
    csum = np.concatenate([[0.0], np.cumsum(values)])
    csq = np.concatenate([[0.0], np.cumsum(values**2)])
    cw = np.concatenate([[0.0], np.cumsum(np.arange(n) * values)])
    starts = np.arange(n - w + 1)
    s1 = csum[starts + w] - csum[starts]
    s2 = csq[starts + w] - csq[starts]
    sw = cw[starts + w] - cw[starts] - starts * s1
    sxy = sw - t_bar * s1
    slope = sxy / sxx
    sse = np.maximum(s2 - s1**2 / w - slope**2 * sxx, 0.0)
    if w > 2:
        se = np.sqrt(sse / (w - 2) / sxx)
    else:
        se = np.zeros_like(slope)
    return slope, se


def detect_trend_changes(ts: TimeSeries, window: int = 24, slope_z: float = 4.0) -> list[int]:
    """Indices where adjacent-window regression slopes disagree.

    Compares the slope over [i-window, i) with the slope over
    [i, i+window); a point is flagged when the difference exceeds
    ``slope_z`` combined standard errors.  Runs of flagged points within
    one window collapse to their strongest member.
    """
    if window < 10:
        raise ValueError("window must be at least 10")
    values = ts.values
    n = values.size
    if n < 2 * window:
        raise SeriesTooShort(f"need at least {2 * window} points, got {n}")
    slope, se = _rolling_slopes(values, window)
    # left window ending at i-1 starts at i-window; right window starts at i
    centers = np.arange(window, n - window + 1)
    b_left = slope[centers - window]
    b_right = slope[centers]
    se_comb = np.sqrt(se[centers - window] ** 2 + se[centers] ** 2)
    delta = np.abs(b_right - b_left)
    z = np.where(delta < 1e-12, 0.0, delta / np.maximum(se_comb, 1e-12))
    flagged = np.nonzero(z > slope_z)[0]
    if flagged.size == 0:
        return []
    out: list[int] = []
    run = [flagged[0]]
    for j in flagged[1:]:
        if j - run[-1] <= window:
            run.append(j)
        else:
            out.append(int(centers[run[int(np.argmax(z[run]))]]))
            run = [j]
    out.append(int(centers[run[int(np.argmax(z[run]))]]))
    return out


# -- stationarization ---------------------------------------------------------


def _segment_mean_spread(values: np.ndarray) -> float:
    """Squared spread of quarter means relative to variance.

    Integrated processes wander, so their segment means differ on the
    scale of the overall variance (statistic >~ 1); stationary series,
    periodic ones included, keep it near zero.
    """
    k = 4
    seg = values.size // k
    if seg < 2:
        return 0.0
    means = [float(values[i * seg : (i + 1) * seg].mean()) for i in range(k)]
    var = float(np.var(values))
    if var <= EPS_VAR:
        return 0.0
    return (max(means) - min(means)) ** 2 / var


def stationarize(ts: TimeSeries, max_d: int = 2) -> tuple[TimeSeries, int]:
    """Difference until the series stops looking integrated.

    A pass differences while any unit-root signal fires: lag-1
    autocorrelation >= 0.99, differencing collapsing the variance below
    an n-scaled share (integrated processes shrink like ~1/n under
    differencing; smooth periodic series level off at a constant share
    and must not be over-differenced, which would blow up d>=1 forecast
    variance), or a persistent series whose quarter means drift on the
    scale of its variance.  Stops at ``max_d`` regardless.
    """
    values = ts.values
    if values.size < 20:
        raise ValueError("stationarize needs at least 20 points")
    d = 0
    current = values
    while d < max_d and current.size >= 3:
        diffed = np.diff(current)
        var_cur = float(np.var(current))
        var_diff = float(np.var(diffed))
        collapse = min(20.0 / current.size, 0.05)
        acf1 = lag1_autocorr(current)
        integrated = (
            acf1 >= 0.99
            or var_diff < var_cur * collapse
            or (acf1 >= 0.8 and _segment_mean_spread(current) >= 0.6)
        )
        if integrated:
            current = diffed
            d += 1
        else:
            break
    return ts.with_values(current), d


# -- spectral selection ---------------------------------------------------------


def select_fourier_frequencies(
    ts: TimeSeries, l_max: int = 3, noise_floor_multiplier: float = 10.0
) -> list[tuple[float, float]]:
    """Dominant periodogram peaks as (cycles-per-step, power) pairs.

    The periodogram is |DFT|^2 / n with the mean removed.  Peak detection
    runs on a Daniell-smoothed copy (5-bin moving average) so that single
    noise bins cannot clear the threshold of ``noise_floor_multiplier``
    times the median smoothed power; reported frequency and power come
    from the raw periodogram bin at each accepted peak.  At most ``l_max``
    peaks are returned, strongest first.
    """
    values = ts.values
    n = values.size
    if n < max(2 * l_max, 16):
        raise ValueError("series too short for spectral selection")
    centered = values - values.mean()
    spectrum = np.abs(np.fft.rfft(centered)) ** 2 / n
    freqs = np.fft.rfftfreq(n)
    # drop DC; keep Nyquist out of peak candidates as well
    power = spectrum[1:-1] if n % 2 == 0 else spectrum[1:]
    bins = freqs[1:-1] if n % 2 == 0 else freqs[1:]
    if power.size < 5:
        return []

    kernel = np.ones(5) / 5.0
    padded = np.concatenate([power[:2][::-1], power, power[-2:][::-1]])
    smoothed = np.convolve(padded, kernel, mode="valid")
    floor = noise_floor_multiplier * float(np.median(smoothed))

    peaks: list[tuple[float, float]] = []
    for i in range(power.size):
        lo = max(0, i - 1)
        hi = min(power.size, i + 2)
        if smoothed[i] < max(smoothed[lo:hi]):
            continue
        if smoothed[i] <= floor:
            continue
        # refine to the strongest raw bin near the smoothed peak
        wlo = max(0, i - 2)
        whi = min(power.size, i + 3)
        j = wlo + int(np.argmax(power[wlo:whi]))
        peaks.append((float(bins[j]), float(power[j])))
    peaks.sort(key=lambda fp: -fp[1])
    deduped: list[tuple[float, float]] = []
    for f, p in peaks:
        if all(abs(f - g) > 1.5 / n for g, _ in deduped):
            deduped.append((f, p))
    return deduped[:l_max]


# -- composite profile -----------------------------------------------------------


def profile(ts: TimeSeries, options: ProfileOptions = ProfileOptions()) -> DataProfile:
    """Run the full profiling pass over a raw (possibly gappy) series."""
    from .series import ImputePolicy, impute

    missing_fraction = ts.missing_fraction
    clean = impute(ts, ImputePolicy(method="linear", max_gap_fraction=1.0))
    n = len(clean)

    change_points = detect_change_points(
        clean, penalty=options.change_penalty, min_segment=options.min_segment
    ) if n >= 2 * options.min_segment else []

    trend_changes = (
        detect_trend_changes(clean, options.trend_window, options.trend_slope_z)
        if n >= 2 * options.trend_window
        else []
    )

    if n >= 20:
        stationary, d = stationarize(clean, max_d=options.max_diff_order)
    else:
        stationary, d = clean, 0

    skew = skewness(clean.values)
    log_recommended = abs(skew) > options.skew_threshold and float(clean.values.min()) > 0.0

    if len(stationary) >= max(2 * options.l_max, 16):
        fourier_terms = select_fourier_frequencies(
            stationary, options.l_max, options.noise_floor_multiplier
        )
    else:
        fourier_terms = []

    return DataProfile(
        change_points=tuple(change_points),
        trend_changes=tuple(trend_changes),
        diff_order=d,
        skewness=skew,
        log_recommended=log_recommended,
        fourier_terms=tuple(fourier_terms),
        missing_fraction=missing_fraction,
    )
