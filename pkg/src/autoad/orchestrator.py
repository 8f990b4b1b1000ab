"""Single-node simulator of the full detection service.

A deterministic step clock reveals each registered series one point per
tick.  Scoring cycles consume the newest points with the active model,
training cycles refit (tuning first when the last health label was red),
and evaluation cycles turn score logs into green/yellow/red labels.  At
a coincident tick the order is score, then train, then evaluate, so
scoring always uses the pre-existing model and retraining evidence stays
uncontaminated.

All state lives as JSON/CSV documents under a data directory (written
atomically), so every cycle is inspectable and re-runnable.
"""

from __future__ import annotations

import csv
import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import evaluation as ev
from .errors import (
    AutoAdError,
    DuplicateId,
    ExpiredModel,
    InvalidSpec,
    MissingModel,
)
from .filtering import FilterState, StateSpaceModel, fit_filtering, frozen_scorer, score_step
from .optimizer import ModelConfig, default_config, tune
from .profiling import DataProfile, profile as profile_series
from .series import ImputePolicy, TimeSeries, impute, read_csv
from .stats import gaussian_anomaly_probability
from .structural import StructuralModel, fit_structural, forecast

RATE_WINDOW = 48  # scores considered by the anomaly-rate trigger
MIN_EVAL_SCORES = 8  # fewer stable scores than this keeps a series in Y


@dataclass(frozen=True)
class JobSpec:
    """One monitored metric: its source and its cycle cadences (in steps)."""

    job_id: str
    metric_id: str
    source: object  # CSV path (str) or {"inline": {...}} document
    train_every: int
    score_every: int = 1
    model_ttl: int = 0  # 0 -> 2 * train_every
    alpha: float = 0.5
    alert_threshold: float = 0.95

    def __post_init__(self):
        if not self.job_id or not self.metric_id:
            raise InvalidSpec("job_id and metric_id must be non-empty")
        if self.train_every < 1 or self.score_every < 1:
            raise InvalidSpec("cadences must be positive step counts")
        if self.score_every > self.train_every:
            raise InvalidSpec("score_every must not exceed train_every")
        if self.model_ttl == 0:
            object.__setattr__(self, "model_ttl", 2 * self.train_every)
        if self.model_ttl < self.train_every:
            raise InvalidSpec("model_ttl must be at least train_every")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidSpec("alpha must lie in [0, 1]")
        if not 0.0 < self.alert_threshold < 1.0:
            raise InvalidSpec("alert_threshold must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "metric_id": self.metric_id,
            "source": self.source,
            "train_every": self.train_every,
            "score_every": self.score_every,
            "model_ttl": self.model_ttl,
            "alpha": self.alpha,
            "alert_threshold": self.alert_threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JobSpec":
        return cls(
            job_id=data["job_id"],
            metric_id=data["metric_id"],
            source=data["source"],
            train_every=int(data["train_every"]),
            score_every=int(data.get("score_every", 1)),
            model_ttl=int(data.get("model_ttl", 0)),
            alpha=float(data.get("alpha", 0.5)),
            alert_threshold=float(data.get("alert_threshold", 0.95)),
        )


def series_to_doc(ts: TimeSeries) -> dict:
    values = [None if math.isnan(v) else float(v) for v in ts.values]
    return {"start_epoch": ts.start_epoch, "step": ts.step, "values": values}


def series_from_doc(doc: dict) -> TimeSeries:
    values = [math.nan if v is None else float(v) for v in doc["values"]]
    return TimeSeries.from_values(values, step=int(doc["step"]), start_epoch=int(doc["start_epoch"]))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, data) -> None:
    _atomic_write(path, json.dumps(data, indent=1, sort_keys=True))


class Engine:
    """File-backed orchestrator driven by a simulated step clock."""

    def __init__(
        self,
        data_dir,
        tune_budget: int = 20,
        workers: int = 1,
        alert_channel: str = "file",
        seed: int = 0,
        n_mc: int = 10_000,
        warmup_steps: Optional[int] = None,
    ):
        if alert_channel not in ("stdout", "file", "webhook_stub"):
            raise ValueError(f"unknown alert channel {alert_channel!r}")
        self.root = Path(data_dir)
        for sub in ("jobs", "models", "state", "scores", "health", "alerts", "tunes"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self.tune_budget = tune_budget
        self.workers = workers
        self.alert_channel = alert_channel
        self.seed = seed
        self.n_mc = n_mc
        self.warmup_steps = warmup_steps
        self._series_cache: dict[str, TimeSeries] = {}
        meta = self._read_json(self.root / "meta.json")
        self.now = int(meta.get("now", 0)) if meta else 0

    # -- storage helpers --------------------------------------------------

    @staticmethod
    def _read_json(path: Path):
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def _persist_clock(self) -> None:
        _write_json(self.root / "meta.json", {"now": self.now})

    def _job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    def _state_path(self, metric_id: str) -> Path:
        return self.root / "state" / f"{metric_id}.json"

    def _model_path(self, metric_id: str) -> Path:
        return self.root / "models" / f"{metric_id}.json"

    def _health_path(self, metric_id: str) -> Path:
        return self.root / "health" / f"{metric_id}.json"

    # -- registry ----------------------------------------------------------

    def register_job(self, spec: JobSpec) -> str:
        """Persist a job; idempotent for an identical spec, DuplicateId otherwise."""
        existing = self._read_json(self._job_path(spec.job_id))
        if existing is not None:
            if existing == spec.to_dict():
                return spec.job_id
            raise DuplicateId(f"job {spec.job_id!r} already registered with a different spec")
        for other in self.jobs():
            if other.metric_id == spec.metric_id:
                raise DuplicateId(f"metric {spec.metric_id!r} already registered under job {other.job_id!r}")
        _write_json(self._job_path(spec.job_id), spec.to_dict())
        return spec.job_id

    def jobs(self) -> list[JobSpec]:
        specs = []
        for path in sorted((self.root / "jobs").glob("*.json")):
            specs.append(JobSpec.from_dict(json.loads(path.read_text())))
        return specs

    def _series(self, spec: JobSpec) -> TimeSeries:
        cached = self._series_cache.get(spec.metric_id)
        if cached is not None:
            return cached
        if isinstance(spec.source, dict) and "inline" in spec.source:
            series = series_from_doc(spec.source["inline"])
        else:
            series = read_csv(str(spec.source))
        self._series_cache[spec.metric_id] = series
        return series

    def _warmup(self, spec: JobSpec) -> int:
        if self.warmup_steps is not None:
            return self.warmup_steps
        return max(30, 2 * spec.train_every)

    # -- model store --------------------------------------------------------

    def _active_record(self, metric_id: str) -> Optional[dict]:
        return self._read_json(self._model_path(metric_id))

    def _publish_model(self, spec: JobSpec, now: int, method: str, payload: dict,
                       config: ModelConfig, prof: DataProfile, generation: int,
                       filter_state: Optional[FilterState]) -> dict:
        record = {
            "schema": 1,
            "model_id": f"{spec.metric_id}-t{now}-g{generation}",
            "metric_id": spec.metric_id,
            "method": method,
            "payload": payload,
            "config": config.to_dict(),
            "profile": prof.to_dict(),
            "published_at": now,
            "expires_at": now + spec.model_ttl,
            "tune_generation": generation,
        }
        _write_json(self._model_path(spec.metric_id), record)
        state = self._scoring_state(spec.metric_id)
        state.update(
            origin=now,
            last_scored=now,
            filter_state=filter_state.to_dict() if filter_state is not None else None,
            last_training_failed=False,
        )
        self._save_scoring_state(spec.metric_id, state)
        return record

    # -- scoring state / log ---------------------------------------------------

    def _scoring_state(self, metric_id: str) -> dict:
        state = self._read_json(self._state_path(metric_id))
        if state is None:
            state = {
                "origin": None,
                "last_scored": 0,
                "filter_state": None,
                "tune_generation": 0,
                "last_training_failed": False,
                "log": [],
            }
        return state

    def _save_scoring_state(self, metric_id: str, state: dict) -> None:
        _write_json(self._state_path(metric_id), state)

    def _score_log(self, metric_id: str, state: dict) -> ev.ScoreLog:
        log = ev.ScoreLog(metric_id, window=500)
        log.entries = [tuple(e) for e in state.get("log", [])]
        return log

    # -- alerting -----------------------------------------------------------------

    def _emit_alert(self, spec: JobSpec, timestamp: int, probability: float,
                    observed: float, expected: float) -> dict:
        event = {
            "metric_id": spec.metric_id,
            "timestamp": timestamp,
            "anomaly_probability": probability,
            "observed": observed,
            "expected": expected,
            "channel": self.alert_channel,
        }
        if self.alert_channel == "stdout":
            print(json.dumps(event, sort_keys=True))
        else:
            name = (
                f"{spec.metric_id}.jsonl"
                if self.alert_channel == "file"
                else "webhook_outbox.jsonl"
            )
            with open(self.root / "alerts" / name, "a") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
        return event

    # -- scoring cycle ---------------------------------------------------------------

    def run_scoring_cycle(self, now: int, force: bool = False) -> list[dict]:
        """Score every due metric's new observations with its active model.

        Returns the ScoreRecords written this cycle.  Expired models skip
        the metric and force its health to R; metrics without a model are
        skipped silently (they are still warming up).
        """
        records: list[dict] = []
        for spec in self.jobs():
            if not force and now % spec.score_every != 0:
                continue
            try:
                records.extend(self._score_metric(spec, now))
            except MissingModel:
                continue
            except ExpiredModel:
                self._force_red(spec, now, reason="expired model")
        return records

    def _score_metric(self, spec: JobSpec, now: int) -> list[dict]:
        record = self._active_record(spec.metric_id)
        if record is None:
            raise MissingModel(spec.metric_id)
        if now >= record["expires_at"]:
            raise ExpiredModel(spec.metric_id)
        series = self._series(spec)
        state = self._scoring_state(spec.metric_id)
        start = max(int(state["last_scored"]), int(record["published_at"]))
        end = min(now, len(series))
        if end <= start:
            return []

        config = ModelConfig.from_dict(record["config"])
        log = self._score_log(spec.metric_id, state)
        out: list[dict] = []

        values = series.values
        if record["method"] == "structural":
            model = StructuralModel.from_dict(record["payload"])
            origin = int(record["published_at"])
            horizon = end - origin
            fc = forecast(model, horizon, transformed=True)
            for i in range(start, end):  # i is the series index == tick-1 ... tick end
                h = i - origin  # index i is the (h+1)-th step after the train end
                mean_t, std_t = fc[h]
                obs = float(values[i])
                if model.log_scale:
                    obs_t = math.log(max(obs + model.log_offset, 1e-300))
                    expected = float(np.exp(mean_t) - model.log_offset)
                else:
                    obs_t = obs
                    expected = mean_t
                prob = float(gaussian_anomaly_probability(obs_t - mean_t, std_t))
                out.append(self._finish_score(spec, series, i, obs, expected, prob, record, config, log))
        else:
            model = StateSpaceModel.from_dict(record["payload"])
            fstate = FilterState.from_dict(state["filter_state"])
            for i in range(start, end):
                obs = float(values[i])
                x = fstate.x_post
                next_level = float(x[0] + x[1]) if model.state_dim == 2 else float(x[0])
                if model.log_scale:
                    obs_t = math.log(max(obs + model.log_offset, 1e-300))
                    expected = float(np.exp(next_level) - model.log_offset)
                else:
                    obs_t = obs
                    expected = next_level
                prob, fstate = score_step(model, fstate, obs_t)
                out.append(self._finish_score(spec, series, i, obs, expected, prob, record, config, log))
            state["filter_state"] = fstate.to_dict()

        state["last_scored"] = end
        state["log"] = [list(e) for e in log.entries]
        self._save_scoring_state(spec.metric_id, state)
        self._append_score_rows(spec.metric_id, out)
        return out

    def _finish_score(self, spec, series, index, observed, expected, prob, record, config, log) -> dict:
        timestamp = int(series.start_epoch + index * series.step)
        is_anomaly = prob >= config.decision_threshold
        log.append(timestamp, prob, observed)
        if prob >= spec.alert_threshold:
            self._emit_alert(spec, timestamp, prob, observed, expected)
        return {
            "metric_id": spec.metric_id,
            "timestamp": timestamp,
            "observed": observed,
            "expected": expected,
            "probability": prob,
            "is_anomaly": int(is_anomaly),
            "model_id": record["model_id"],
        }

    def _append_score_rows(self, metric_id: str, rows: list[dict]) -> None:
        if not rows:
            return
        path = self.root / "scores" / f"{metric_id}.csv"
        new = not path.exists()
        with open(path, "a", newline="") as fh:
            writer = csv.writer(fh)
            if new:
                writer.writerow(
                    ["metric_id", "timestamp", "observed", "expected",
                     "probability", "is_anomaly", "model_id"]
                )
            for r in rows:
                writer.writerow(
                    [r["metric_id"], r["timestamp"], repr(r["observed"]),
                     repr(r["expected"]), repr(r["probability"]),
                     r["is_anomaly"], r["model_id"]]
                )

    # -- training cycle ------------------------------------------------------------------

    def run_training_cycle(self, now: int, force: bool = False) -> list[dict]:
        """Retrain every due metric, tuning first where health is red.

        Per-metric failures are isolated: they are recorded (feeding the
        health evaluation) and never abort the cycle.
        """
        due = []
        for spec in self.jobs():
            if force or (now % spec.train_every == 0 and now >= self._warmup(spec)):
                due.append(spec)
        if not due:
            return []
        if self.workers > 1 and len(due) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(lambda s: self._train_metric(s, now), due))
        return [self._train_metric(spec, now) for spec in due]

    def _tune_seed(self, metric_id: str, generation: int) -> int:
        return (zlib.crc32(metric_id.encode()) + 7919 * generation + self.seed) % (2**31)

    def _train_metric(self, spec: JobSpec, now: int) -> dict:
        outcome = {"metric_id": spec.metric_id, "at": now, "status": "trained",
                   "tuned": False, "method": None, "error": None}
        state = self._scoring_state(spec.metric_id)
        try:
            series = self._series(spec)
            data = TimeSeries(
                start_epoch=series.start_epoch,
                step=series.step,
                values=series.values[: min(now, len(series))],
                freq_label=series.freq_label,
            )
            health_doc = self._read_json(self._health_path(spec.metric_id))
            health = health_doc["snapshot"]["health"] if health_doc else None
            record = self._active_record(spec.metric_id)
            generation = int(state.get("tune_generation", 0))

            if health == "R":
                result = tune(
                    data,
                    budget=self.tune_budget,
                    alpha=spec.alpha,
                    seed=self._tune_seed(spec.metric_id, generation + 1),
                )
                generation += 1
                state["tune_generation"] = generation
                self._save_scoring_state(spec.metric_id, state)
                _write_json(
                    self.root / "tunes" / f"{spec.metric_id}-g{generation}.json",
                    result.to_dict(),
                )
                config = result.best_config
                outcome["tuned"] = True
            elif record is not None:
                config = ModelConfig.from_dict(record["config"])
            else:
                config = None  # profile-informed default, built below

            prof = profile_series(data)
            if config is None:
                config = default_config(prof, len(data))
            prepared = impute(
                data,
                ImputePolicy(method="linear", max_gap_fraction=config.max_missing_fraction),
            )
            if config.truncate_at is not None and 0 < config.truncate_at < len(prepared) - 30:
                prepared = TimeSeries(
                    start_epoch=int(prepared.start_epoch + config.truncate_at * prepared.step),
                    step=prepared.step,
                    values=prepared.values[config.truncate_at :],
                    freq_label=prepared.freq_label,
                )

            method = config.method
            payload = None
            fstate = None
            if method == "structural":
                try:
                    model = fit_structural(prepared, prof, config)
                    payload = model.to_dict()
                except AutoAdError as exc:
                    # keep the metric alive on a filter model rather than alert-blind
                    outcome["error"] = f"structural fit failed: {exc}"
                    fallback = ModelConfig(
                        method="filtering",
                        truncate_at=config.truncate_at,
                        max_missing_fraction=config.max_missing_fraction,
                        log_scale=config.log_scale,
                        decision_threshold=config.decision_threshold,
                    )
                    config = fallback
                    method = "filtering"
            if method == "filtering" and payload is None:
                fmodel, fstate = fit_filtering(prepared, config)
                payload = fmodel.to_dict()

            self._publish_model(spec, now, method, payload, config, prof, generation, fstate)
            outcome["method"] = method
            outcome["status"] = "trained" if outcome["error"] is None else "trained_fallback"
        except Exception as exc:  # noqa: BLE001 - cycle must survive any metric
            outcome["status"] = "failed"
            outcome["error"] = str(exc)
            state["last_training_failed"] = True
            self._save_scoring_state(spec.metric_id, state)
        return outcome

    # -- evaluation cycle -----------------------------------------------------------------

    def _force_red(self, spec: JobSpec, now: int, reason: str) -> None:
        snapshot = self._evaluate_metric(spec, now, ev.HealthThresholds())
        if snapshot.health != "R":
            snapshot = ev.HealthSnapshot(
                mv_avg=snapshot.mv_avg,
                em_avg=snapshot.em_avg,
                anomaly_rate=snapshot.anomaly_rate,
                consecutive_anomalies=snapshot.consecutive_anomalies,
                coefficient_of_variation=snapshot.coefficient_of_variation,
                model_age_fraction=max(snapshot.model_age_fraction, 1.0),
                health="R",
            )
        _write_json(
            self._health_path(spec.metric_id),
            {"at": now, "reason": reason, "snapshot": snapshot.to_dict()},
        )

    def metric_scorer(self, spec: JobSpec, now: int):
        """(score_fn, stable_scores, domain) for a metric, or None.

        The scorer maps candidate observed values to stability scores
        using the active model frozen at evaluation time; the domain pads
        the observed value range by 10% on each side.  None means there
        is no model or not enough stable score history yet.
        """
        record = self._active_record(spec.metric_id)
        if record is None:
            return None
        state = self._scoring_state(spec.metric_id)
        log = self._score_log(spec.metric_id, state)
        scores = log.stable_scores(spec.alert_threshold, guard=5)
        if scores.size < MIN_EVAL_SCORES:
            return None
        obs = log.observations()
        lo, hi = float(obs.min()), float(obs.max())
        span = max(hi - lo, 1e-6 * max(abs(hi), 1.0), 1e-9)
        domain = (lo - 0.1 * span, hi + 0.1 * span)

        if record["method"] == "structural":
            model = StructuralModel.from_dict(record["payload"])
            horizon = max(now - int(record["published_at"]), 1)
            mean_t, std_t = forecast(model, horizon, transformed=True)[-1]

            def score_fn(values):
                values = np.asarray(values, dtype=float)
                if model.log_scale:
                    values = np.log(np.maximum(values + model.log_offset, 1e-300))
                probs = gaussian_anomaly_probability(values - mean_t, np.full_like(values, std_t))
                return 1.0 - probs

        else:
            model = StateSpaceModel.from_dict(record["payload"])
            fstate = FilterState.from_dict(state["filter_state"])
            prob_fn = frozen_scorer(model, fstate)

            def score_fn(values):
                return 1.0 - np.asarray(prob_fn(values))

        return score_fn, scores, domain

    def metric_curves(self, spec: JobSpec, now: int):
        """(mv, em) curve points for one metric, or None without history."""
        built = self.metric_scorer(spec, now)
        if built is None:
            return None
        score_fn, scores, domain = built
        seed = self._tune_seed(spec.metric_id, now)
        mv = ev.mv_curve(score_fn, scores, ev.default_alphas(), domain, n_mc=self.n_mc, seed=seed)
        em = ev.em_curve(score_fn, scores, ev.default_em_ts(scores, domain), domain, n_mc=self.n_mc, seed=seed)
        return mv, em

    def _curve_stats(self, spec: JobSpec, now: int):
        """(mv_avg, em_avg) for the metric's stable scores, or None."""
        curves = self.metric_curves(spec, now)
        if curves is None:
            return None
        return ev.summarize_criteria(*curves)

    def _evaluate_metric(self, spec: JobSpec, now: int,
                         thresholds: ev.HealthThresholds,
                         curve_stats=None) -> ev.HealthSnapshot:
        state = self._scoring_state(spec.metric_id)
        log = self._score_log(spec.metric_id, state)
        record = self._active_record(spec.metric_id)
        if record is not None:
            ttl = record["expires_at"] - record["published_at"]
            age = (now - record["published_at"]) / ttl if ttl > 0 else 1.0
        else:
            age = 0.0
        rate = log.anomaly_rate(spec.alert_threshold, last=RATE_WINDOW)
        consec = log.consecutive_anomalies(spec.alert_threshold)
        cov = log.coefficient_of_variation()
        failed = bool(state.get("last_training_failed", False))

        if curve_stats is None:
            # not enough stable history: the series stays under scrutiny
            if record is None or len(log.entries) < MIN_EVAL_SCORES:
                return ev.HealthSnapshot(0.0, 0.0, rate, consec, cov, age, "Y")
            mv_avg, em_avg = 0.0, 0.0
            thresholds = ev.HealthThresholds(
                mv_red=None,
                em_red=None,
                rate_red=thresholds.rate_red,
                consecutive_red=thresholds.consecutive_red,
                soft_factor=thresholds.soft_factor,
            )
        else:
            mv_avg, em_avg = curve_stats
        health = ev.classify_health(
            mv_avg, em_avg, rate, consec, cov, age, thresholds, last_training_failed=failed,
        )
        return ev.HealthSnapshot(mv_avg, em_avg, rate, consec, cov, age, health)

    def run_evaluation_cycle(self, now: int) -> dict[str, ev.HealthSnapshot]:
        """Label every registered metric G, Y or R (one label per metric)."""
        specs = self.jobs()
        stats: dict[str, Optional[tuple[float, float]]] = {}
        for spec in specs:
            try:
                stats[spec.metric_id] = self._curve_stats(spec, now)
            except AutoAdError:
                stats[spec.metric_id] = None

        mv_values = [s[0] for s in stats.values() if s is not None]
        em_values = [s[1] for s in stats.values() if s is not None]
        thresholds = ev.HealthThresholds(
            mv_red=2.0 * float(np.median(mv_values)) if mv_values else None,
            em_red=0.5 * float(np.median(em_values)) if em_values else None,
        )

        out: dict[str, ev.HealthSnapshot] = {}
        for spec in specs:
            snapshot = self._evaluate_metric(spec, now, thresholds, stats[spec.metric_id])
            out[spec.metric_id] = snapshot
            _write_json(
                self._health_path(spec.metric_id),
                {"at": now, "snapshot": snapshot.to_dict()},
            )
        return out

    # -- clock ---------------------------------------------------------------------------

    def advance_clock(self, steps: int) -> int:
        """Advance the simulated clock tick by tick, firing due cycles."""
        if steps < 1:
            raise ValueError("steps must be >= 1")
        specs = self.jobs()
        for _ in range(steps):
            self.now += 1
            tick = self.now
            if any(tick % s.score_every == 0 for s in specs):
                self.run_scoring_cycle(tick)
            if any(tick % s.train_every == 0 and tick >= self._warmup(s) for s in specs):
                self.run_training_cycle(tick)
                self.run_evaluation_cycle(tick)
        self._persist_clock()
        return self.now

    # -- reporting ----------------------------------------------------------------------

    def status(self) -> list[dict]:
        rows = []
        for spec in self.jobs():
            health_doc = self._read_json(self._health_path(spec.metric_id))
            record = self._active_record(spec.metric_id)
            state = self._scoring_state(spec.metric_id)
            rows.append(
                {
                    "job_id": spec.job_id,
                    "metric_id": spec.metric_id,
                    "health": health_doc["snapshot"]["health"] if health_doc else "-",
                    "method": record["method"] if record else "-",
                    "model_id": record["model_id"] if record else "-",
                    "tune_generation": int(state.get("tune_generation", 0)),
                    "last_scored": int(state.get("last_scored", 0)),
                }
            )
        return rows

    def tune_generation(self, metric_id: str) -> int:
        return int(self._scoring_state(metric_id).get("tune_generation", 0))
