"""Configuration search: synthetic labels, the combined cost, and TPE.

Labels are manufactured by perturbing a smoothed copy of the series at
random points and scales, the candidate configuration is trained against
the labeled series, and its cost combines anomaly cross-entropy with
holdout forecasting error (structural method) or is the cross-entropy
alone (filtering method).  A tree-structured Parzen estimator searches
the configuration space; invalid configurations surface as infinite cost
rather than exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AutoAdError, RateTooHigh
from .filtering import fit_filtering, run_filter
from .profiling import DataProfile, profile as profile_series
from .series import ImputePolicy, TimeSeries, impute, smooth
from .stats import gaussian_anomaly_probability, mad_std
from .structural import fit_structural, forecast, in_sample_probabilities

PROB_CLIP = 1e-6
WARMUP_POINTS = 10  # first points excluded from injection and cross-entropy
HOLDOUT_FRACTION = 0.2
DEFAULT_SCALES = (3.0, 5.0, 8.0)
DEFAULT_RATE = 0.05


# -- configuration record ----------------------------------------------------


@dataclass(frozen=True)
class StructuralParams:
    p: int = 1
    q: int = 0
    l: int = 0

    def __post_init__(self):
        if not (0 <= self.p <= 3 and 0 <= self.q <= 3 and self.l >= 0):
            raise ValueError("structural orders out of range")


@dataclass(frozen=True)
class FilteringParams:
    state_dim: int = 1
    forgetting: float = 0.99

    def __post_init__(self):
        if self.state_dim not in (1, 2):
            raise ValueError("state_dim must be 1 or 2")
        if not 0.9 <= self.forgetting <= 0.9999:
            raise ValueError("forgetting must lie in [0.9, 0.9999]")


@dataclass(frozen=True)
class ModelConfig:
    """One point of the tunable configuration space."""

    method: str = "structural"
    truncate_at: Optional[int] = None
    max_missing_fraction: float = 0.3
    log_scale: bool = False
    structural_params: Optional[StructuralParams] = None
    filtering_params: Optional[FilteringParams] = None
    decision_threshold: float = 0.95

    def __post_init__(self):
        if self.method not in ("structural", "filtering"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 <= self.max_missing_fraction <= 1.0:
            raise ValueError("max_missing_fraction must lie in [0, 1]")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must lie in (0, 1)")
        if self.method == "structural":
            if self.structural_params is None:
                object.__setattr__(self, "structural_params", StructuralParams())
            if self.filtering_params is not None:
                raise ValueError("structural config must not carry filtering params")
        else:
            if self.filtering_params is None:
                object.__setattr__(self, "filtering_params", FilteringParams())
            if self.structural_params is not None:
                raise ValueError("filtering config must not carry structural params")

    def to_dict(self) -> dict:
        data = {
            "method": self.method,
            "truncate_at": self.truncate_at,
            "max_missing_fraction": self.max_missing_fraction,
            "log_scale": self.log_scale,
            "decision_threshold": self.decision_threshold,
        }
        if self.structural_params is not None:
            sp = self.structural_params
            data["structural_params"] = {"p": sp.p, "q": sp.q, "l": sp.l}
        if self.filtering_params is not None:
            fp = self.filtering_params
            data["filtering_params"] = {
                "state_dim": fp.state_dim,
                "forgetting": fp.forgetting,
            }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        sp = data.get("structural_params")
        fp = data.get("filtering_params")
        return cls(
            method=data["method"],
            truncate_at=data.get("truncate_at"),
            max_missing_fraction=float(data.get("max_missing_fraction", 0.3)),
            log_scale=bool(data.get("log_scale", False)),
            structural_params=StructuralParams(**sp) if sp else None,
            filtering_params=FilteringParams(**fp) if fp else None,
            decision_threshold=float(data.get("decision_threshold", 0.95)),
        )


def default_config(profile: DataProfile, n: int) -> ModelConfig:
    """Profile-informed configuration used before any tuning has run."""
    l = 0
    for cand in range(min(len(profile.fourier_terms), 3), -1, -1):
        if n >= 10 * (1 + 0 + 2 * cand + 1):
            l = cand
            break
    if n >= 10 * (1 + 0 + 2 * l + 1):
        return ModelConfig(
            method="structural",
            log_scale=profile.log_recommended,
            structural_params=StructuralParams(p=1, q=0, l=l),
        )
    return ModelConfig(method="filtering", log_scale=profile.log_recommended)


# -- synthetic labels -----------------------------------------------------------


@dataclass(frozen=True)
class LabeledSeries:
    series: TimeSeries
    labels: np.ndarray
    injected: tuple[tuple[int, float], ...]

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if labels.size != len(self.series):
            raise ValueError("labels length must match the series")


def inject_synthetic_anomalies(
    ts: TimeSeries,
    rate: float = DEFAULT_RATE,
    scales: Sequence[float] = DEFAULT_SCALES,
    seed: int = 0,
) -> LabeledSeries:
    """Perturb ceil(rate*n) points by +-scale robust-sigmas; reproducible by seed.

    The robust sigma is MAD*1.4826 of the (smoothed) input, floored at
    1e-6 of the mean magnitude for degenerate series.  The first
    WARMUP_POINTS indices are never perturbed.
    """
    if rate < 0.0 or rate > 0.1:
        raise RateTooHigh(f"injection rate must lie in [0, 0.1], got {rate}")
    if not scales:
        raise ValueError("scales must be non-empty")
    n = len(ts)
    values = ts.values.copy()
    labels = np.zeros(n, dtype=np.int8)
    k = math.ceil(rate * n)
    if k == 0:
        return LabeledSeries(series=ts, labels=labels, injected=())
    if n - WARMUP_POINTS <= k:
        raise RateTooHigh(f"cannot place {k} anomalies in {n - WARMUP_POINTS} candidate points")

    sigma = mad_std(values)
    sigma = max(sigma, 1e-6 * abs(float(np.mean(values))), 1e-12)

    rng = np.random.default_rng(seed)
    idx = rng.choice(np.arange(WARMUP_POINTS, n), size=k, replace=False)
    signs = rng.choice(np.array([-1.0, 1.0]), size=k)
    chosen = rng.choice(np.asarray(scales, dtype=float), size=k)
    injected = []
    for i, sign, scale in zip(idx, signs, chosen):
        values[i] += sign * scale * sigma
        labels[i] = 1
        injected.append((int(i), float(sign * scale)))
    injected.sort()
    return LabeledSeries(
        series=ts.with_values(values), labels=labels, injected=tuple(injected)
    )


# -- cost -------------------------------------------------------------------------


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy with probabilities clipped to [1e-6, 1-1e-6]."""
    p = np.clip(np.asarray(probs, dtype=float), PROB_CLIP, 1.0 - PROB_CLIP)
    y = np.asarray(labels, dtype=float)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def mape(pred: np.ndarray, actual: np.ndarray, floor: float = 1e-8) -> float:
    """Mean absolute percentage error (as a fraction) with floored denominators."""
    pred = np.asarray(pred, dtype=float)
    actual = np.asarray(actual, dtype=float)
    return float(np.mean(np.abs(pred - actual) / np.maximum(np.abs(actual), floor)))


def _structural_probabilities(train: TimeSeries, holdout: np.ndarray, prof, config):
    model = fit_structural(train, prof, config)
    n_train = len(train)
    probs = np.full(n_train + holdout.size, 0.5)
    probs[model.d : n_train] = in_sample_probabilities(model)
    preds_raw = np.zeros(holdout.size)
    if holdout.size:
        fc_t = forecast(model, holdout.size, transformed=True)
        obs = holdout
        if model.log_scale:
            obs = np.log(np.maximum(holdout + model.log_offset, 1e-12))
        means = np.array([m for m, _ in fc_t])
        stds = np.array([s for _, s in fc_t])
        probs[n_train:] = gaussian_anomaly_probability(obs - means, stds)
        if model.log_scale:
            preds_raw = np.exp(means) - model.log_offset
        else:
            preds_raw = means
    return probs, preds_raw


def _filtering_probabilities(train: TimeSeries, holdout: np.ndarray, config):
    model, state = fit_filtering(train, config)
    y_train = train.values
    if model.log_scale:
        y_train = np.log(y_train + model.log_offset)
    train_probs, _ = run_filter(model, y_train)
    if holdout.size:
        h = holdout
        if model.log_scale:
            h = np.log(np.maximum(holdout + model.log_offset, 1e-12))
        hold_probs, _ = run_filter(model, h, state)
    else:
        hold_probs = np.zeros(0)
    return np.concatenate([train_probs, hold_probs])


def cost(
    config: ModelConfig,
    labeled: LabeledSeries,
    alpha: float,
    profile: Optional[DataProfile] = None,
) -> float:
    """Convex combination of anomaly cross-entropy and holdout MAPE.

    Structural configurations pay alpha*CE + (1-alpha)*MAPE; filtering
    configurations pay CE regardless of alpha.  Any training failure (or
    a series whose missing fraction exceeds the configuration allowance)
    is absorbed as +inf.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    prof = profile if profile is not None else DataProfile()
    if prof.missing_fraction > config.max_missing_fraction:
        return math.inf

    series = labeled.series
    labels = labeled.labels
    if config.truncate_at is not None and config.truncate_at > 0:
        if len(series) - config.truncate_at < 40:
            return math.inf
        start_epoch = int(series.start_epoch + config.truncate_at * series.step)
        series = TimeSeries(
            start_epoch=start_epoch,
            step=series.step,
            values=series.values[config.truncate_at :],
            freq_label=series.freq_label,
        )
        labels = labels[config.truncate_at :]

    n = len(series)
    n_train = max(int(math.floor(n * (1.0 - HOLDOUT_FRACTION))), 1)
    train = series.with_values(series.values[:n_train])
    holdout = series.values[n_train:]

    try:
        if config.method == "structural":
            probs, preds = _structural_probabilities(train, holdout, prof, config)
        else:
            probs = _filtering_probabilities(train, holdout, config)
    except (AutoAdError, np.linalg.LinAlgError):
        return math.inf
    if not np.all(np.isfinite(probs)):
        return math.inf

    ce = cross_entropy(probs[WARMUP_POINTS:], labels[WARMUP_POINTS:])
    if config.method == "filtering":
        return ce
    forecast_error = mape(preds, holdout) if holdout.size else 0.0
    total = alpha * ce + (1.0 - alpha) * forecast_error
    return total if math.isfinite(total) else math.inf


# -- tree-Parzen search ------------------------------------------------------------


@dataclass(frozen=True)
class TuneResult:
    best_config: ModelConfig
    best_cost: float
    trials: tuple[tuple[ModelConfig, float], ...]
    seed: int

    def to_dict(self) -> dict:
        return {
            "best_config": self.best_config.to_dict(),
            "best_cost": self.best_cost,
            "seed": self.seed,
            "trials": [
                {"config": cfg.to_dict(), "cost": c} for cfg, c in self.trials
            ],
        }


def _cost_key(config: ModelConfig, missing_fraction: float):
    """Projection of a config onto the fields that can influence its cost.

    decision_threshold never enters the cost, and max_missing_fraction
    only matters through the pass/fail gate against the observed missing
    fraction, so configs identical under this key share one evaluation.
    """
    gate_ok = missing_fraction <= config.max_missing_fraction
    if config.method == "structural":
        sp = config.structural_params
        branch = (sp.p, sp.q, sp.l)
    else:
        fp = config.filtering_params
        branch = (fp.state_dim, round(fp.forgetting, 12))
    return (config.method, config.truncate_at, config.log_scale, gate_ok, branch)


@dataclass(frozen=True)
class _CatDim:
    name: str
    choices: tuple

    def prior_sample(self, rng):
        return self.choices[int(rng.integers(len(self.choices)))]

    def weights(self, observed):
        counts = [0.5] * len(self.choices)
        for v in observed:
            counts[self.choices.index(v)] += 1.0
        total = sum(counts)
        return [c / total for c in counts]

    def sample(self, rng, observed):
        w = self.weights(observed)
        return self.choices[int(rng.choice(len(self.choices), p=w))]

    def log_pdf(self, value, observed):
        return math.log(self.weights(observed)[self.choices.index(value)])


@dataclass(frozen=True)
class _FloatDim:
    name: str
    lo: float
    hi: float

    def prior_sample(self, rng):
        return float(rng.uniform(self.lo, self.hi))

    def _bandwidth(self, xs):
        span = self.hi - self.lo
        if len(xs) < 2:
            return span / 4.0
        sd = float(np.std(xs))
        return max(1.06 * sd * len(xs) ** -0.2, span / 50.0)

    def sample(self, rng, observed):
        if not observed or rng.random() < 1.0 / (len(observed) + 1.0):
            return self.prior_sample(rng)
        bw = self._bandwidth(observed)
        center = observed[int(rng.integers(len(observed)))]
        for _ in range(50):
            x = rng.normal(center, bw)
            if self.lo <= x <= self.hi:
                return float(x)
        return self.prior_sample(rng)

    def log_pdf(self, value, observed):
        span = self.hi - self.lo
        if not observed:
            return -math.log(span)
        bw = self._bandwidth(observed)
        xs = np.asarray(observed, dtype=float)
        kernel = np.exp(-0.5 * ((value - xs) / bw) ** 2) / (bw * math.sqrt(2 * math.pi))
        dens = (kernel.sum() + 1.0 / span) / (len(observed) + 1.0)
        return math.log(max(dens, 1e-300))


def _build_space(prof: DataProfile, n: int):
    truncate_choices = (None,) + tuple(
        cp for cp in prof.change_points if n - cp >= 40
    )
    l_avail = min(len(prof.fourier_terms), 3)
    shared = [
        _CatDim("log_scale", (False, True)),
        _CatDim("truncate_at", truncate_choices),
        _FloatDim("max_missing_fraction", 0.0, 1.0),
        _FloatDim("decision_threshold", 0.5, 0.999),
    ]
    method = _CatDim("method", ("structural", "filtering"))
    structural = [
        _CatDim("p", (0, 1, 2, 3)),
        _CatDim("q", (0, 1, 2, 3)),
        _CatDim("l", tuple(range(l_avail + 1))),
    ]
    filtering = [
        _CatDim("state_dim", (1, 2)),
        _FloatDim("forgetting", 0.9, 0.9999),
    ]
    return method, shared, structural, filtering


def _assemble(values: dict) -> ModelConfig:
    if values["method"] == "structural":
        params = StructuralParams(p=values["p"], q=values["q"], l=values["l"])
        return ModelConfig(
            method="structural",
            truncate_at=values["truncate_at"],
            max_missing_fraction=values["max_missing_fraction"],
            log_scale=values["log_scale"],
            structural_params=params,
            decision_threshold=values["decision_threshold"],
        )
    params = FilteringParams(
        state_dim=values["state_dim"], forgetting=values["forgetting"]
    )
    return ModelConfig(
        method="filtering",
        truncate_at=values["truncate_at"],
        max_missing_fraction=values["max_missing_fraction"],
        log_scale=values["log_scale"],
        filtering_params=params,
        decision_threshold=values["decision_threshold"],
    )


def _flatten(config: ModelConfig) -> dict:
    out = {
        "method": config.method,
        "truncate_at": config.truncate_at,
        "max_missing_fraction": config.max_missing_fraction,
        "log_scale": config.log_scale,
        "decision_threshold": config.decision_threshold,
    }
    if config.structural_params is not None:
        out.update(
            p=config.structural_params.p,
            q=config.structural_params.q,
            l=config.structural_params.l,
        )
    if config.filtering_params is not None:
        out.update(
            state_dim=config.filtering_params.state_dim,
            forgetting=config.filtering_params.forgetting,
        )
    return out


def _sample_prior(rng, method, shared, structural, filtering) -> dict:
    values = {dim.name: dim.prior_sample(rng) for dim in shared}
    values["method"] = method.prior_sample(rng)
    branch = structural if values["method"] == "structural" else filtering
    for dim in branch:
        values[dim.name] = dim.prior_sample(rng)
    return values


def prepare_labeled(
    ts: TimeSeries,
    seed: int,
    rate: float = DEFAULT_RATE,
    scales: Sequence[float] = DEFAULT_SCALES,
    smooth_window: int = 5,
) -> tuple[LabeledSeries, DataProfile]:
    """Impute, smooth and inject: the shared front half of every tuning run."""
    prof = profile_series(ts)
    clean = impute(ts, ImputePolicy(method="linear", max_gap_fraction=1.0))
    window = min(smooth_window, len(clean) if len(clean) % 2 == 1 else len(clean) - 1)
    smoothed = smooth(clean, max(1, window), kind="median")
    labeled = inject_synthetic_anomalies(smoothed, rate=rate, scales=scales, seed=seed)
    return labeled, prof


def tune(
    ts: TimeSeries,
    budget: int = 40,
    alpha: float = 0.5,
    seed: int = 0,
    n_startup: Optional[int] = None,
    gamma: float = 0.25,
    n_ei: int = 24,
    rate: float = DEFAULT_RATE,
    scales: Sequence[float] = DEFAULT_SCALES,
) -> TuneResult:
    """Tree-Parzen search over the configuration space.

    The first ``n_startup`` (default budget//4) trials sample the prior;
    afterwards observed trials are split at the ``gamma`` cost quantile,
    each dimension is density-modeled within the good and bad sets, and
    the best of ``n_ei`` candidates by good/bad density ratio is
    evaluated.  Deterministic given the seed.
    """
    if budget < 10:
        raise ValueError("budget must be at least 10")
    labeled, prof = prepare_labeled(ts, seed=seed, rate=rate, scales=scales)
    if n_startup is None:
        n_startup = max(1, budget // 4)

    method, shared, structural, filtering = _build_space(prof, len(labeled.series))
    rng = np.random.default_rng(seed)

    trials: list[tuple[ModelConfig, float]] = []
    flat_history: list[dict] = []
    costs: list[float] = []
    cache: dict[tuple, float] = {}
    missing_fraction = prof.missing_fraction

    def observed(dims_subset: list, rows: list[dict], method_filter=None):
        per_dim = {}
        for dim in dims_subset:
            vals = []
            for row in rows:
                if method_filter is not None and row["method"] != method_filter:
                    continue
                if dim.name in row:
                    vals.append(row[dim.name])
            per_dim[dim.name] = vals
        return per_dim

    for i in range(budget):
        if i < n_startup or len(trials) < 2:
            values = _sample_prior(rng, method, shared, structural, filtering)
            config = _assemble(values)
        else:
            order = np.argsort(np.asarray(costs), kind="stable")
            n_good = max(1, math.ceil(gamma * len(costs)))
            good_rows = [flat_history[j] for j in order[:n_good]]
            bad_rows = [flat_history[j] for j in order[n_good:]]

            scored: list[tuple[float, ModelConfig]] = []
            for _ in range(n_ei):
                cand = {}
                cand["method"] = method.sample(
                    rng, [row["method"] for row in good_rows]
                )
                for dim in shared:
                    cand[dim.name] = dim.sample(
                        rng, [row[dim.name] for row in good_rows if dim.name in row]
                    )
                branch = structural if cand["method"] == "structural" else filtering
                good_branch = observed(branch, good_rows, cand["method"])
                bad_branch = observed(branch, bad_rows, cand["method"])
                for dim in branch:
                    cand[dim.name] = dim.sample(rng, good_branch[dim.name])

                score = method.log_pdf(
                    cand["method"], [row["method"] for row in good_rows]
                ) - method.log_pdf(cand["method"], [row["method"] for row in bad_rows])
                for dim in shared:
                    g_obs = [row[dim.name] for row in good_rows if dim.name in row]
                    b_obs = [row[dim.name] for row in bad_rows if dim.name in row]
                    score += dim.log_pdf(cand[dim.name], g_obs) - dim.log_pdf(
                        cand[dim.name], b_obs
                    )
                for dim in branch:
                    score += dim.log_pdf(cand[dim.name], good_branch[dim.name])
                    score -= dim.log_pdf(cand[dim.name], bad_branch[dim.name])
                scored.append((score, _assemble(cand)))
            # prefer the best not-yet-evaluated candidate: the cost is
            # deterministic, so re-evaluating a known configuration is a
            # wasted trial
            scored.sort(key=lambda sc: -sc[0])
            config = scored[0][1]
            for _, cand_config in scored:
                if _cost_key(cand_config, missing_fraction) not in cache:
                    config = cand_config
                    break
        key = _cost_key(config, missing_fraction)
        c = cache.get(key)
        if c is None:
            c = cost(config, labeled, alpha, profile=prof)
            cache[key] = c
        trials.append((config, c))
        flat_history.append(_flatten(config))
        costs.append(c)

    best_idx = int(np.argmin(np.where(np.isfinite(costs), costs, math.inf)))
    return TuneResult(
        best_config=trials[best_idx][0],
        best_cost=costs[best_idx],
        trials=tuple(trials),
        seed=seed,
    )


def random_search(
    ts: TimeSeries,
    budget: int = 40,
    alpha: float = 0.5,
    seed: int = 0,
    rate: float = DEFAULT_RATE,
    scales: Sequence[float] = DEFAULT_SCALES,
) -> TuneResult:
    """Pure prior sampling with the same seed stream as the TPE startup phase."""
    return tune(
        ts,
        budget=budget,
        alpha=alpha,
        seed=seed,
        n_startup=budget,
        rate=rate,
        scales=scales,
    )
