"""Structural model: ARMA errors around a Fourier regression.

The observed series (optionally log-transformed, then differenced) is
regressed on cosine/sine pairs at the profiled frequencies; the regression
residual is fitted as an ARMA(p, q) process by conditional sum-of-squares.
Forecasts recurse the ARMA part, add the deterministic regression part and
integrate back through differencing and the log transform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import InsufficientData, NonConvergence
from .profiling import DataProfile
from .series import TimeSeries
from .stats import autocovariances, gaussian_anomaly_probability

if TYPE_CHECKING:  # pragma: no cover
    from .optimizer import ModelConfig

_SIGMA2_FLOOR = 1e-12
_UNSTABLE_PENALTY = 1e10


@dataclass(frozen=True)
class StructuralModel:
    """Fitted ARMA-with-regressors model plus the state forecasting needs."""

    p: int
    q: int
    phi: np.ndarray
    omega: np.ndarray
    theta: np.ndarray  # cos/sin coefficient pairs, 2 per frequency
    frequencies: tuple[float, ...]
    d: int
    log_scale: bool
    log_offset: float
    sigma2: float
    train_mean: float  # regression intercept on the modeled scale
    residuals: np.ndarray  # in-sample innovations
    train_len: int
    tail_values: np.ndarray  # last value of each differencing level 0..d-1
    r_tail: np.ndarray  # trailing regression residuals (ARMA inputs)
    eps_tail: np.ndarray  # trailing innovations for the MA recursion

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "method": "structural",
            "p": self.p,
            "q": self.q,
            "phi": self.phi.tolist(),
            "omega": self.omega.tolist(),
            "theta": self.theta.tolist(),
            "frequencies": list(self.frequencies),
            "d": self.d,
            "log_scale": self.log_scale,
            "log_offset": self.log_offset,
            "sigma2": self.sigma2,
            "train_mean": self.train_mean,
            "train_len": self.train_len,
            "tail_values": self.tail_values.tolist(),
            "r_tail": self.r_tail.tolist(),
            "eps_tail": self.eps_tail.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StructuralModel":
        return cls(
            p=int(data["p"]),
            q=int(data["q"]),
            phi=np.asarray(data["phi"], dtype=float),
            omega=np.asarray(data["omega"], dtype=float),
            theta=np.asarray(data["theta"], dtype=float),
            frequencies=tuple(data["frequencies"]),
            d=int(data["d"]),
            log_scale=bool(data["log_scale"]),
            log_offset=float(data["log_offset"]),
            sigma2=float(data["sigma2"]),
            train_mean=float(data["train_mean"]),
            residuals=np.zeros(0),
            train_len=int(data["train_len"]),
            tail_values=np.asarray(data["tail_values"], dtype=float),
            r_tail=np.asarray(data["r_tail"], dtype=float),
            eps_tail=np.asarray(data["eps_tail"], dtype=float),
        )


def _fourier_design(t: np.ndarray, frequencies: Sequence[float]) -> np.ndarray:
    cols = [np.ones_like(t, dtype=float)]
    for f in frequencies:
        cols.append(np.cos(2.0 * math.pi * f * t))
        cols.append(np.sin(2.0 * math.pi * f * t))
    return np.column_stack(cols)


def _ar_roots_stable(phi: np.ndarray) -> bool:
    if phi.size == 0:
        return True
    roots = np.roots(np.concatenate([[1.0], -phi])[::-1])
    return bool(np.all(np.abs(roots) > 1.0 + 1e-9)) if roots.size else True


def _css_innovations(phi: np.ndarray, omega: np.ndarray, r: np.ndarray) -> np.ndarray:
    # (1 + omega_1 B + ...) eps_t = (1 - phi_1 B - ...) r_t, eps presample = 0
    b = np.concatenate([[1.0], -phi])
    a = np.concatenate([[1.0], omega])
    return lfilter(b, a, r)


def _yule_walker(r: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return np.zeros(0)
    gam = autocovariances(r, p)
    if gam[0] <= 0:
        return np.zeros(p)
    col = gam[:p].copy()
    col[0] *= 1.0 + 1e-8
    try:
        phi = solve_toeplitz(col, gam[1 : p + 1])
    except (np.linalg.LinAlgError, ValueError):
        return np.zeros(p)
    phi = np.asarray(phi, dtype=float)
    while not _ar_roots_stable(phi):
        phi *= 0.95
    return phi


def fit_structural(ts: TimeSeries, profile: DataProfile, config: "ModelConfig") -> StructuralModel:
    """Fit the structural model described by config against a profiled series.

    Raises InsufficientData when the series cannot support the requested
    order and NonConvergence when the CSS optimization breaks down.
    """
    params = config.structural_params
    if params is None:
        raise ValueError("config has no structural parameters")
    p, q, l = params.p, params.q, params.l
    frequencies = tuple(f for f, _ in profile.fourier_terms[:l])
    l = len(frequencies)
    n = len(ts)
    if n < 10 * (p + q + 2 * l + 1):
        raise InsufficientData(
            f"need {10 * (p + q + 2 * l + 1)} points for (p={p}, q={q}, l={l}), got {n}"
        )
    if ts.missing_mask.any():
        raise ValueError("fit_structural requires an imputed series")

    y = ts.values.astype(float)
    log_offset = 0.0
    if config.log_scale:
        log_offset = max(0.0, 1.0 - float(y.min()))
        y = np.log(y + log_offset)

    d = profile.diff_order
    tail_values = np.empty(d)
    level = y
    for k in range(d):
        tail_values[k] = level[-1]
        level = np.diff(level)
    z = level
    if z.size <= p + q + 2 * l + 1:
        raise InsufficientData("differenced series too short for the requested order")

    t_idx = np.arange(d, n, dtype=float)
    design = _fourier_design(t_idx, frequencies)
    coef, *_ = np.linalg.lstsq(design, z, rcond=None)
    if not np.all(np.isfinite(coef)):
        raise NonConvergence("regression produced non-finite coefficients")
    train_mean = float(coef[0])
    theta = coef[1:]
    r = z - design @ coef

    burn = p
    if p == 0 and q == 0:
        phi = np.zeros(0)
        omega = np.zeros(0)
        eps = r.copy()
    elif q == 0:
        # pure AR: conditional least squares has a closed form
        lagged = np.column_stack([r[p - i - 1 : r.size - i - 1] for i in range(p)])
        target = r[p:]
        phi, *_ = np.linalg.lstsq(lagged, target, rcond=None)
        if not np.all(np.isfinite(phi)):
            raise NonConvergence("AR least squares produced non-finite coefficients")
        omega = np.zeros(0)
        eps = _css_innovations(phi, omega, r)
    else:
        phi0 = _yule_walker(r, p)
        x0 = np.concatenate([phi0, np.zeros(q)])
        scale = float(np.mean(r**2)) + _SIGMA2_FLOOR

        def objective(x: np.ndarray) -> float:
            phi_x, omega_x = x[:p], x[p:]
            if not (_ar_roots_stable(phi_x) and _ar_roots_stable(-omega_x)):
                return _UNSTABLE_PENALTY * scale
            eps_x = _css_innovations(phi_x, omega_x, r)
            css = float(np.mean(eps_x[burn:] ** 2))
            return css if math.isfinite(css) else _UNSTABLE_PENALTY * scale

        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxiter": 400 * (p + q), "xatol": 1e-6, "fatol": 1e-10},
        )
        if not np.all(np.isfinite(res.x)) or not math.isfinite(res.fun):
            raise NonConvergence("CSS optimization diverged")
        if res.fun >= _UNSTABLE_PENALTY * scale:
            raise NonConvergence("CSS optimization found no stable parameters")
        phi, omega = res.x[:p].copy(), res.x[p:].copy()
        eps = _css_innovations(phi, omega, r)

    sigma2 = float(np.mean(eps[burn:] ** 2)) if eps.size > burn else float(np.mean(eps**2))
    if not math.isfinite(sigma2):
        raise NonConvergence("innovation variance is not finite")
    sigma2 = max(sigma2, _SIGMA2_FLOOR)

    if not _ar_roots_stable(phi):
        warnings.warn("fitted AR polynomial has roots on or inside the unit circle", stacklevel=2)

    keep = max(p, 1)
    return StructuralModel(
        p=p,
        q=q,
        phi=np.asarray(phi, dtype=float),
        omega=np.asarray(omega, dtype=float),
        theta=np.asarray(theta, dtype=float),
        frequencies=frequencies,
        d=d,
        log_scale=config.log_scale,
        log_offset=log_offset,
        sigma2=sigma2,
        train_mean=train_mean,
        residuals=eps,
        train_len=n,
        tail_values=tail_values,
        r_tail=r[-keep:].copy(),
        eps_tail=eps[-max(q, 1) :].copy(),
    )


def _psi_weights(model: StructuralModel, h: int) -> np.ndarray:
    psi = np.zeros(h)
    psi[0] = 1.0
    for j in range(1, h):
        acc = model.omega[j - 1] if j - 1 < model.q else 0.0
        for i in range(1, min(j, model.p) + 1):
            acc += model.phi[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def forecast(model: StructuralModel, h: int, transformed: bool = False) -> list[tuple[float, float]]:
    """h-step-ahead (mean, std) pairs.

    The ARMA recursion runs on the regression-residual scale; the
    deterministic Fourier part is added back, the result integrated
    through the differencing levels, and (unless ``transformed``) mapped
    back through the log transform.  Forecast variance accumulates the
    d-times-cumulated psi weights:

        var(h) = sigma2 * sum_{j<h} (psi*_j)^2,   psi* = cumsum^d(psi)

    which is non-decreasing in h.
    """
    if h < 1:
        raise ValueError("horizon must be >= 1")
    p, q = model.p, model.q
    r_hist = list(model.r_tail[-p:]) if p else []
    eps_hist = list(model.eps_tail[-q:]) if q else []
    r_fc = np.zeros(h)
    for k in range(h):
        acc = 0.0
        for i in range(1, p + 1):
            past = r_fc[k - i] if k - i >= 0 else (r_hist[k - i] if p and k - i >= -len(r_hist) else 0.0)
            acc += model.phi[i - 1] * past
        for j in range(1, q + 1):
            idx = k - j
            if idx < 0 and q and idx >= -len(eps_hist):
                acc += model.omega[j - 1] * eps_hist[idx]
        r_fc[k] = acc

    t_future = np.arange(model.train_len, model.train_len + h, dtype=float)
    design = _fourier_design(t_future, model.frequencies)
    coef = np.concatenate([[model.train_mean], model.theta])
    z_fc = design @ coef + r_fc

    level = z_fc
    for k in range(model.d - 1, -1, -1):
        level = model.tail_values[k] + np.cumsum(level)
    mean = level

    psi = _psi_weights(model, h)
    for _ in range(model.d):
        psi = np.cumsum(psi)
    var = model.sigma2 * np.cumsum(psi**2)
    std = np.sqrt(var)

    if model.log_scale and not transformed:
        raw_mean = np.exp(mean) - model.log_offset
        raw_std = np.exp(mean) * std
        return list(zip(raw_mean.tolist(), raw_std.tolist()))
    return list(zip(mean.tolist(), std.tolist()))


def anomaly_probability_structural(
    model: StructuralModel | None,
    observed: float,
    forecast_mean: float,
    forecast_std: float,
    eps: float = 1e-12,
) -> float:
    """Two-sided Gaussian tail probability of the observation given the forecast."""
    return float(gaussian_anomaly_probability(observed - forecast_mean, forecast_std, eps))


def in_sample_probabilities(model: StructuralModel) -> np.ndarray:
    """Anomaly probabilities of the training innovations (aligned to the
    differenced index; original index j + d)."""
    sigma = math.sqrt(model.sigma2)
    return np.asarray(
        gaussian_anomaly_probability(model.residuals, np.full(model.residuals.size, sigma))
    )
