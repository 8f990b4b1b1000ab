"""Filter-based model: linear-Gaussian state space with Kalman recursion.

Two canonical structures are supported: a local level (state_dim 1) and a
local linear trend (state_dim 2).  Each observation updates the state; the
level shift between posterior and prior estimates is the residual whose
running Gaussian statistics (with exponential forgetting) drive anomaly
probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import InsufficientData, NumericalBreakdown
from .stats import gaussian_anomaly_probability

if TYPE_CHECKING:  # pragma: no cover
    from .optimizer import ModelConfig
    from .series import TimeSeries

_ETA_VAR_FLOOR = 1e-12
_R_FLOOR = 1e-10


@dataclass(frozen=True)
class StateSpaceModel:
    """Canonical local-level / local-linear-trend state space.

    state_dim 1 fixes A=[1], C=[1]; state_dim 2 fixes A=[1 0],
    C=[[1,1],[0,1]].  Q and P0 must be symmetric PSD, R positive.
    """

    state_dim: int
    A: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: float
    x0: np.ndarray
    P0: np.ndarray
    forgetting: float = 0.99
    log_scale: bool = False
    log_offset: float = 0.0

    def __post_init__(self):
        if self.state_dim not in (1, 2):
            raise ValueError("state_dim must be 1 or 2")
        for name in ("A", "C", "Q", "x0", "P0"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        m = self.state_dim
        if self.A.shape != (1, m) or self.C.shape != (m, m):
            raise ValueError("A must be 1xm and C mxm")
        if self.Q.shape != (m, m) or self.P0.shape != (m, m) or self.x0.shape != (m,):
            raise ValueError("Q, P0 must be mxm and x0 length m")
        if self.R <= 0:
            raise ValueError("R must be positive")
        for mat in (self.Q, self.P0):
            if not np.allclose(mat, mat.T):
                raise ValueError("Q and P0 must be symmetric")
            if np.linalg.eigvalsh(mat).min() < -1e-10:
                raise ValueError("Q and P0 must be positive semi-definite")

    @classmethod
    def local_level(cls, q: float, r: float, x0: float = 0.0, p0: float = 1.0, **kw):
        return cls(
            state_dim=1,
            A=np.array([[1.0]]),
            C=np.array([[1.0]]),
            Q=np.array([[q]]),
            R=r,
            x0=np.array([x0]),
            P0=np.array([[p0]]),
            **kw,
        )

    @classmethod
    def local_linear_trend(
        cls,
        q_level: float,
        q_slope: float,
        r: float,
        x0=(0.0, 0.0),
        p0: float = 1.0,
        **kw,
    ):
        return cls(
            state_dim=2,
            A=np.array([[1.0, 0.0]]),
            C=np.array([[1.0, 1.0], [0.0, 1.0]]),
            Q=np.diag([q_level, q_slope]).astype(float),
            R=r,
            x0=np.asarray(x0, dtype=float),
            P0=np.eye(2) * p0,
            **kw,
        )

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "method": "filtering",
            "state_dim": self.state_dim,
            "Q": self.Q.tolist(),
            "R": self.R,
            "x0": self.x0.tolist(),
            "P0": self.P0.tolist(),
            "forgetting": self.forgetting,
            "log_scale": self.log_scale,
            "log_offset": self.log_offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StateSpaceModel":
        m = int(data["state_dim"])
        A = np.array([[1.0]]) if m == 1 else np.array([[1.0, 0.0]])
        C = np.array([[1.0]]) if m == 1 else np.array([[1.0, 1.0], [0.0, 1.0]])
        return cls(
            state_dim=m,
            A=A,
            C=C,
            Q=np.asarray(data["Q"], dtype=float),
            R=float(data["R"]),
            x0=np.asarray(data["x0"], dtype=float),
            P0=np.asarray(data["P0"], dtype=float),
            forgetting=float(data.get("forgetting", 0.99)),
            log_scale=bool(data.get("log_scale", False)),
            log_offset=float(data.get("log_offset", 0.0)),
        )


@dataclass(frozen=True)
class FilterState:
    """Value-semantics filter state; one kalman_step produces the next one."""

    x_prior: np.ndarray
    x_post: np.ndarray
    P_prior: np.ndarray
    P_post: np.ndarray
    eta: float = 0.0
    eta_mean: float = 0.0
    eta_var: float = 0.0
    w_sum: float = 0.0
    s_accum: float = 0.0

    @classmethod
    def initial(cls, model: StateSpaceModel) -> "FilterState":
        return cls(
            x_prior=model.x0.copy(),
            x_post=model.x0.copy(),
            P_prior=model.P0.copy(),
            P_post=model.P0.copy(),
        )

    def to_dict(self) -> dict:
        return {
            "x_prior": self.x_prior.tolist(),
            "x_post": self.x_post.tolist(),
            "P_prior": self.P_prior.tolist(),
            "P_post": self.P_post.tolist(),
            "eta": self.eta,
            "eta_mean": self.eta_mean,
            "eta_var": self.eta_var,
            "w_sum": self.w_sum,
            "s_accum": self.s_accum,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FilterState":
        return cls(
            x_prior=np.asarray(data["x_prior"], dtype=float),
            x_post=np.asarray(data["x_post"], dtype=float),
            P_prior=np.asarray(data["P_prior"], dtype=float),
            P_post=np.asarray(data["P_post"], dtype=float),
            eta=float(data["eta"]),
            eta_mean=float(data["eta_mean"]),
            eta_var=float(data["eta_var"]),
            w_sum=float(data["w_sum"]),
            s_accum=float(data["s_accum"]),
        )


def _forgetting_update(w_sum, mean, s_accum, eta, lam):
    # weighted Welford recursion; lam=1 reproduces exact batch statistics
    w_new = lam * w_sum + 1.0
    delta = eta - mean
    mean_new = mean + delta / w_new
    s_new = lam * s_accum + delta * (eta - mean_new)
    var_new = s_new / w_new
    return w_new, mean_new, s_new, max(var_new, 0.0)


def kalman_step(model: StateSpaceModel, state: FilterState, y: float) -> FilterState:
    """One predict/update cycle; returns the successor state.

    Covariances are re-symmetrized after the update.  A non-positive
    innovation variance triggers one re-symmetrize-and-retry before
    NumericalBreakdown is raised.
    """
    if not math.isfinite(y):
        raise ValueError("observation must be finite")
    A, C, Q, R = model.A, model.C, model.Q, model.R
    x_prior = C @ state.x_post
    P_prior = C @ state.P_post @ C.T + Q
    P_prior = (P_prior + P_prior.T) / 2.0

    s_innov = float((A @ P_prior @ A.T).item()) + R
    if s_innov <= 0.0:
        P_prior = (P_prior + P_prior.T) / 2.0
        s_innov = float((A @ P_prior @ A.T).item()) + R
        if s_innov <= 0.0:
            raise NumericalBreakdown(f"innovation variance {s_innov} <= 0")

    gain = (P_prior @ A.T).ravel() / s_innov
    innovation = y - float((A @ x_prior).item())
    x_post = x_prior + gain * innovation
    P_post = (np.eye(model.state_dim) - np.outer(gain, A.ravel())) @ P_prior
    P_post = (P_post + P_post.T) / 2.0

    eta = float(x_post[0] - x_prior[0])
    w_new, mean_new, s_new, var_new = _forgetting_update(
        state.w_sum, state.eta_mean, state.s_accum, eta, model.forgetting
    )
    return FilterState(
        x_prior=x_prior,
        x_post=x_post,
        P_prior=P_prior,
        P_post=P_post,
        eta=eta,
        eta_mean=mean_new,
        eta_var=var_new,
        w_sum=w_new,
        s_accum=s_new,
    )


def anomaly_probability_filtering(state: FilterState, model: StateSpaceModel, y: float) -> float:
    """Anomaly probability of observation y given the trained residual law.

    Applies one hypothetical Kalman step and scores the resulting level
    residual against N(eta_mean, eta_var) accumulated so far (variance
    floored).  Shares the two-sided Gaussian tail with the structural
    scorer.
    """
    prob, _ = score_step(model, state, y)
    return prob


def score_step(model: StateSpaceModel, state: FilterState, y: float) -> tuple[float, FilterState]:
    """Score y against the pre-update residual statistics, then advance."""
    new_state = kalman_step(model, state, y)
    sd = math.sqrt(max(state.eta_var, _ETA_VAR_FLOOR))
    prob = float(gaussian_anomaly_probability(new_state.eta - state.eta_mean, sd))
    return prob, new_state


def run_filter(
    model: StateSpaceModel, values: np.ndarray, state: Optional[FilterState] = None
) -> tuple[np.ndarray, FilterState]:
    """Filter a whole sequence, returning per-step anomaly probabilities.

    Each observation is scored against the residual statistics before it
    is absorbed, so the pass is causal end to end.  Uses an unrolled
    scalar/2x2 fast path that is step-for-step equivalent to
    :func:`kalman_step`.
    """
    if state is None:
        state = FilterState.initial(model)
    values = np.asarray(values, dtype=float)
    lam = model.forgetting
    R = model.R
    probs = np.empty(values.size)

    w_sum, mean, s_accum = state.w_sum, state.eta_mean, state.s_accum
    var = state.eta_var

    if model.state_dim == 1:
        q = float(model.Q[0, 0])
        x = float(state.x_post[0])
        p = float(state.P_post[0, 0])
        x_prior = p_prior = 0.0
        eta = state.eta
        for i, y in enumerate(values):
            x_prior = x
            p_prior = p + q
            s_innov = p_prior + R
            if s_innov <= 0.0:
                raise NumericalBreakdown(f"innovation variance {s_innov} <= 0")
            k = p_prior / s_innov
            x = x_prior + k * (y - x_prior)
            p = (1.0 - k) * p_prior
            eta = x - x_prior
            sd = math.sqrt(max(var, _ETA_VAR_FLOOR))
            probs[i] = gaussian_anomaly_probability(eta - mean, sd)
            w_sum, mean, s_accum, var = _forgetting_update(w_sum, mean, s_accum, eta, lam)
        final = FilterState(
            x_prior=np.array([x_prior]),
            x_post=np.array([x]),
            P_prior=np.array([[p_prior]]),
            P_post=np.array([[p]]),
            eta=eta,
            eta_mean=mean,
            eta_var=var,
            w_sum=w_sum,
            s_accum=s_accum,
        )
        return probs, final

    q00 = float(model.Q[0, 0])
    q11 = float(model.Q[1, 1])
    x0_, x1_ = float(state.x_post[0]), float(state.x_post[1])
    p00 = float(state.P_post[0, 0])
    p01 = float(state.P_post[0, 1])
    p11 = float(state.P_post[1, 1])
    xp0 = xp1 = pp00 = pp01 = pp11 = 0.0
    eta = state.eta
    for i, y in enumerate(values):
        # predict with C = [[1,1],[0,1]]
        xp0 = x0_ + x1_
        xp1 = x1_
        pp00 = p00 + 2.0 * p01 + p11 + q00
        pp01 = p01 + p11
        pp11 = p11 + q11
        s_innov = pp00 + R
        if s_innov <= 0.0:
            raise NumericalBreakdown(f"innovation variance {s_innov} <= 0")
        k0 = pp00 / s_innov
        k1 = pp01 / s_innov
        innovation = y - xp0
        x0_ = xp0 + k0 * innovation
        x1_ = xp1 + k1 * innovation
        p00 = (1.0 - k0) * pp00
        p01 = (1.0 - k0) * pp01
        p11 = pp11 - k1 * pp01
        eta = x0_ - xp0
        sd = math.sqrt(max(var, _ETA_VAR_FLOOR))
        probs[i] = gaussian_anomaly_probability(eta - mean, sd)
        w_sum, mean, s_accum, var = _forgetting_update(w_sum, mean, s_accum, eta, lam)
    final = FilterState(
        x_prior=np.array([xp0, xp1]),
        x_post=np.array([x0_, x1_]),
        P_prior=np.array([[pp00, pp01], [pp01, pp11]]),
        P_post=np.array([[p00, p01], [p01, p11]]),
        eta=eta,
        eta_mean=mean,
        eta_var=var,
        w_sum=w_sum,
        s_accum=s_accum,
    )
    return probs, final


def _concentrated_likelihood(values: np.ndarray, state_dim: int, rho: float, p0: float, x0):
    """Prediction-error likelihood with R concentrated out at ratio rho = q/r."""
    n = values.size
    sum_log_s = 0.0
    sum_ratio = 0.0
    if state_dim == 1:
        x = float(x0[0])
        p = p0
        for y in values:
            p_prior = p + rho
            s = p_prior + 1.0
            nu = y - x
            sum_log_s += math.log(s)
            sum_ratio += nu * nu / s
            k = p_prior / s
            x = x + k * nu
            p = (1.0 - k) * p_prior
    else:
        x0_, x1_ = float(x0[0]), float(x0[1])
        p00 = p11 = p0
        p01 = 0.0
        q00 = rho
        q11 = rho * 0.01  # slope noise two orders below level noise
        for y in values:
            xp0 = x0_ + x1_
            pp00 = p00 + 2.0 * p01 + p11 + q00
            pp01 = p01 + p11
            pp11 = p11 + q11
            s = pp00 + 1.0
            nu = y - xp0
            sum_log_s += math.log(s)
            sum_ratio += nu * nu / s
            k0 = pp00 / s
            k1 = pp01 / s
            x0_ = xp0 + k0 * nu
            x1_ = x1_ + k1 * nu
            p00 = (1.0 - k0) * pp00
            p01 = (1.0 - k0) * pp01
            p11 = pp11 - k1 * pp01
    r_hat = max(sum_ratio / n, _R_FLOOR)
    loglik = -0.5 * (sum_log_s + n * math.log(r_hat) + n)
    return loglik, r_hat


def fit_filtering(ts: "TimeSeries", config: "ModelConfig") -> tuple[StateSpaceModel, FilterState]:
    """Select noise parameters by likelihood and warm up the residual law.

    The q/r ratio is searched over 7 log-spaced values with one local
    refinement round; R is concentrated out of the likelihood
    analytically.  A full training pass then populates the residual
    statistics under the configured forgetting factor.
    """
    params = config.filtering_params
    if params is None:
        raise ValueError("config has no filtering parameters")
    n = len(ts)
    if n < 30:
        raise InsufficientData(f"filtering fit needs at least 30 points, got {n}")
    if ts.missing_mask.any():
        raise ValueError("fit_filtering requires an imputed series")

    y = ts.values.astype(float)
    log_offset = 0.0
    if config.log_scale:
        log_offset = max(0.0, 1.0 - float(y.min()))
        y = np.log(y + log_offset)

    m = params.state_dim
    if m == 1:
        x0 = np.array([y[0]])
    else:
        k0 = min(10, n - 1)
        x0 = np.array([y[0], float(np.mean(np.diff(y[: k0 + 1])))])
    p0_scale = 10.0 * float(np.var(y)) + 1.0

    def scan(rhos):
        best = (-math.inf, None, None)
        for rho in rhos:
            loglik, r_hat = _concentrated_likelihood(y, m, rho, p0_scale, x0)
            if loglik > best[0]:
                best = (loglik, rho, r_hat)
        return best

    _, rho_best, _ = scan(np.logspace(-3.0, 3.0, 7))
    _, rho_best, r_hat = scan(rho_best * np.logspace(-0.5, 0.5, 5))

    r = max(r_hat, _R_FLOOR)
    if m == 1:
        model = StateSpaceModel.local_level(
            q=rho_best * r,
            r=r,
            x0=float(x0[0]),
            p0=p0_scale,
            forgetting=params.forgetting,
            log_scale=config.log_scale,
            log_offset=log_offset,
        )
    else:
        model = StateSpaceModel.local_linear_trend(
            q_level=rho_best * r,
            q_slope=rho_best * r * 0.01,
            r=r,
            x0=x0,
            p0=p0_scale,
            forgetting=params.forgetting,
            log_scale=config.log_scale,
            log_offset=log_offset,
        )
    _, state = run_filter(model, y)
    return model, state


def frozen_scorer(model: StateSpaceModel, state: FilterState):
    """Vectorized map value -> anomaly probability with the filter frozen.

    Used by the self-evaluation stage: candidate observations are pushed
    through one hypothetical update from the current state without
    mutating anything.
    """
    A, C, Q = model.A, model.C, model.Q
    x_prior = C @ state.x_post
    P_prior = C @ state.P_post @ C.T + Q
    s_innov = float((A @ P_prior @ A.T).item()) + model.R
    gain0 = float((P_prior @ A.T).ravel()[0]) / s_innov
    center = float((A @ x_prior).item())
    sd = math.sqrt(max(state.eta_var, _ETA_VAR_FLOOR))
    mean = state.eta_mean

    def score(values):
        values = np.asarray(values, dtype=float)
        if model.log_scale:
            values = np.log(np.maximum(values + model.log_offset, 1e-12))
        eta = gain0 * (values - center)
        return gaussian_anomaly_probability(eta - mean, np.full_like(eta, sd))

    return score
