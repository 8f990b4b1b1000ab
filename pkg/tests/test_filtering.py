import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autoad.errors import InsufficientData
from autoad.filtering import (
    FilterState,
    StateSpaceModel,
    anomaly_probability_filtering,
    fit_filtering,
    frozen_scorer,
    kalman_step,
    run_filter,
    score_step,
)
from autoad.optimizer import FilteringParams, ModelConfig
from autoad.series import TimeSeries
from autoad.structural import anomaly_probability_structural

ts_of = TimeSeries.from_values


def filtering_config(state_dim=1, forgetting=0.99, log_scale=False):
    return ModelConfig(
        method="filtering",
        log_scale=log_scale,
        filtering_params=FilteringParams(state_dim=state_dim, forgetting=forgetting),
    )


def oracle_recursion(A, C, Q, R, x0, P0, observations):
    """Textbook Kalman recursion written directly with numpy matrix ops."""
    x = np.array(x0, dtype=float)
    P = np.array(P0, dtype=float)
    m = x.size
    I = np.eye(m)
    for y in observations:
        x_prior = C @ x
        P_prior = C @ P @ C.T + Q
        P_prior = (P_prior + P_prior.T) / 2
        S = (A @ P_prior @ A.T).item() + R
        K = (P_prior @ A.T) / S
        x = x_prior + (K * (y - (A @ x_prior).item())).ravel()
        P = (I - K @ A) @ P_prior
        P = (P + P.T) / 2
    return x, P


def random_model(rng, state_dim):
    r = float(rng.uniform(0.05, 3.0))
    if state_dim == 1:
        model = StateSpaceModel.local_level(
            q=float(rng.uniform(0.01, 2.0)),
            r=r,
            x0=float(rng.normal(0, 2)),
            p0=float(rng.uniform(0.1, 5.0)),
        )
    else:
        model = StateSpaceModel.local_linear_trend(
            q_level=float(rng.uniform(0.01, 2.0)),
            q_slope=float(rng.uniform(0.001, 0.2)),
            r=r,
            x0=rng.normal(0, 2, 2),
            p0=float(rng.uniform(0.1, 5.0)),
        )
    return model


class TestKalmanStep:
    def test_hand_evaluated_scalar_step(self):
        model = StateSpaceModel.local_level(q=0.1, r=1.0, x0=0.0, p0=1.0)
        state = kalman_step(model, FilterState.initial(model), 1.0)
        k = 1.1 / 2.1
        assert state.x_post[0] == pytest.approx(k, rel=1e-12)
        assert state.eta == pytest.approx(k, rel=1e-12)
        assert state.P_prior[0, 0] == pytest.approx(1.1)

    def test_noiseless_constant_tracking(self):
        model = StateSpaceModel.local_level(q=0.0, r=1e-9, x0=0.0, p0=1.0)
        state = FilterState.initial(model)
        for _ in range(50):
            state = kalman_step(model, state, 4.0)
        assert state.x_post[0] == pytest.approx(4.0, abs=1e-6)
        assert abs(state.eta) < 1e-6

    @pytest.mark.parametrize("state_dim", [1, 2])
    def test_matches_direct_recursion_oracle(self, state_dim, rng):
        model = random_model(rng, state_dim)
        ys = rng.normal(0, 1, 500)
        state = FilterState.initial(model)
        for y in ys:
            state = kalman_step(model, state, y)
        x, P = oracle_recursion(model.A, model.C, model.Q, model.R, model.x0, model.P0, ys)
        assert np.max(np.abs(state.x_post - x)) < 1e-10
        assert np.max(np.abs(state.P_post - P)) < 1e-10

    @pytest.mark.parametrize("state_dim", [1, 2])
    def test_fast_path_equivalent_to_step(self, state_dim, rng):
        model = random_model(rng, state_dim)
        ys = rng.normal(0, 1, 300)
        state = FilterState.initial(model)
        probs = []
        for y in ys:
            p, state = score_step(model, state, y)
            probs.append(p)
        fast_probs, fast_state = run_filter(model, ys)
        assert np.allclose(probs, fast_probs, atol=1e-12)
        assert np.allclose(state.x_post, fast_state.x_post, atol=1e-12)
        assert np.allclose(state.P_post, fast_state.P_post, atol=1e-12)
        assert state.eta_var == pytest.approx(fast_state.eta_var, abs=1e-14)

    def test_covariances_stay_symmetric_psd_long_run(self, rng):
        """10^5 randomized steps across fresh models keep P symmetric PSD."""
        steps_total = 0
        while steps_total < 100_000:
            model = random_model(rng, 2 if steps_total % 2 else 1)
            state = FilterState.initial(model)
            for i, y in enumerate(rng.normal(0, 5, 10_000)):
                state = kalman_step(model, state, y)
                if i % 100 == 0:
                    assert np.array_equal(state.P_post, state.P_post.T)
                    assert np.linalg.eigvalsh(state.P_post).min() >= -1e-12
            steps_total += 10_000

    def test_rejects_non_finite_observation(self):
        model = StateSpaceModel.local_level(q=0.1, r=1.0)
        with pytest.raises(ValueError):
            kalman_step(model, FilterState.initial(model), float("nan"))

    @given(lam=st.floats(0.9, 0.9999), seed=st.integers(0, 50))
    @settings(max_examples=20, deadline=None)
    def test_full_memory_matches_batch_statistics(self, lam, seed):
        rng = np.random.default_rng(seed)
        model = StateSpaceModel.local_level(q=0.3, r=1.0, forgetting=1.0)
        state = FilterState.initial(model)
        etas = []
        for y in rng.normal(0, 1, 200):
            state = kalman_step(model, state, y)
            etas.append(state.eta)
        assert state.eta_mean == pytest.approx(np.mean(etas), abs=1e-10)
        assert state.eta_var == pytest.approx(np.var(etas), abs=1e-10)


class TestFitFiltering:
    def test_ratio_recovery_within_factor_three(self):
        rng = np.random.default_rng(7)
        n = 1000
        level = np.cumsum(rng.normal(0, math.sqrt(0.1), n))
        y = level + rng.normal(0, 1.0, n)
        model, _ = fit_filtering(ts_of(y), filtering_config())
        ratio = model.Q[0, 0] / model.R
        assert 0.1 / 3 <= ratio <= 0.1 * 3

    def test_constant_series_floors(self):
        model, state = fit_filtering(ts_of(np.full(100, 4.2)), filtering_config())
        assert model.R <= 1e-8
        assert state.eta_var == pytest.approx(0.0, abs=1e-12)

    def test_white_noise_prediction_variance(self, rng):
        y = rng.normal(0, 1, 1000)
        model, state = fit_filtering(ts_of(y), filtering_config())
        pred_var = state.P_prior[0, 0] + model.Q[0, 0] + model.R
        assert 0.8 <= pred_var <= 1.2

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            fit_filtering(ts_of(np.ones(10)), filtering_config())

    def test_trend_model_tracks_slope(self, rng):
        y = 0.5 * np.arange(300.0) + rng.normal(0, 0.5, 300)
        model, state = fit_filtering(ts_of(y), filtering_config(state_dim=2))
        assert state.x_post[1] == pytest.approx(0.5, abs=0.2)


class TestAnomalyProbability:
    def test_zero_at_residual_mean(self):
        model = StateSpaceModel.local_level(q=0.1, r=1.0)
        state = FilterState(
            x_prior=np.array([0.0]),
            x_post=np.array([0.0]),
            P_prior=np.array([[0.5]]),
            P_post=np.array([[0.25]]),
            eta_mean=0.0,
            eta_var=0.04,
            w_sum=100.0,
        )
        # the observation whose update produces eta == eta_mean scores zero
        prob, new_state = score_step(model, state, 0.0)
        assert new_state.eta == pytest.approx(state.eta_mean)
        assert prob == pytest.approx(0.0)

    def test_ninety_five_at_z196(self, rng):
        model = StateSpaceModel.local_level(q=0.1, r=1.0)
        state = FilterState(
            x_prior=np.array([0.0]),
            x_post=np.array([0.0]),
            P_prior=np.array([[0.5]]),
            P_post=np.array([[0.25]]),
            eta_mean=0.0,
            eta_var=0.04,
            w_sum=100.0,
        )
        # gain = P_prior/(P_prior+R); choose y so eta = 1.959964 * sqrt(eta_var)
        p_prior = 0.25 + 0.1
        gain = p_prior / (p_prior + 1.0)
        y = 1.959964 * 0.2 / gain
        prob = anomaly_probability_filtering(state, model, y)
        assert abs(prob - 0.95) <= 1e-4

    def test_ten_sigma_spike_on_quiet_series(self, rng):
        y = rng.normal(10, 0.5, 300)
        model, state = fit_filtering(ts_of(y), filtering_config())
        spike = 10 + 10 * 0.5 * 10
        prob, _ = score_step(model, state, spike)
        assert prob > 0.999

    def test_shared_tail_with_structural_scorer(self):
        """Both scorers reduce to the same two-sided Gaussian tail."""
        model = StateSpaceModel.local_level(q=0.1, r=1.0)
        state = FilterState(
            x_prior=np.array([0.0]),
            x_post=np.array([0.0]),
            P_prior=np.array([[0.5]]),
            P_post=np.array([[0.25]]),
            eta_mean=0.1,
            eta_var=0.09,
            w_sum=50.0,
        )
        prob, new_state = score_step(model, state, 1.7)
        z_equiv = (new_state.eta - state.eta_mean) / math.sqrt(state.eta_var)
        structural = anomaly_probability_structural(None, z_equiv, 0.0, 1.0)
        assert prob == pytest.approx(structural, abs=1e-12)

    def test_frozen_scorer_matches_score_step(self, rng):
        y = rng.normal(5, 1, 200)
        model, state = fit_filtering(ts_of(y), filtering_config())
        scorer = frozen_scorer(model, state)
        candidates = np.array([4.0, 5.0, 6.0, 9.0])
        frozen = scorer(candidates)
        stepped = [score_step(model, state, float(v))[0] for v in candidates]
        assert np.allclose(frozen, stepped, atol=1e-12)


class TestSerialization:
    def test_model_and_state_round_trip(self, rng):
        y = rng.normal(0, 1, 200)
        model, state = fit_filtering(ts_of(y), filtering_config(state_dim=2, forgetting=0.95))
        model2 = StateSpaceModel.from_dict(model.to_dict())
        state2 = FilterState.from_dict(state.to_dict())
        p1, s1 = run_filter(model, y[:50], state)
        p2, s2 = run_filter(model2, y[:50], state2)
        assert np.array_equal(p1, p2)
        assert np.allclose(s1.x_post, s2.x_post)
