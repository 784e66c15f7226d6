"""Losses, Adam, min-max scaling, and the mini-batch training loop."""

import datetime as dt
import math

import numpy as np
import pytest

from eadforecast.data import FeatureWindow
from eadforecast.errors import ConfigError, NumericalError
from eadforecast.linalg import finite_diff_gradient
from eadforecast.lstm import ModelSpec, init_params, model_leaves
from eadforecast.training import (
    AdamState,
    TrainConfig,
    adam_step,
    apply_scaler,
    fit_scaler,
    loss_and_grad,
    train,
)
from tests.test_lstm import random_model


class TestLossAndGrad:
    def test_perfect_prediction(self):
        loss, grad = loss_and_grad([1.0, 2.0], [1.0, 2.0], "mse")
        assert loss == 0.0
        assert np.array_equal(grad, np.zeros(2))

    def test_cross_entropy_at_half(self):
        # K=1, p=y=0.5: L = ln 2
        loss, _ = loss_and_grad([0.5], [0.5], "xent")
        np.testing.assert_allclose(loss, math.log(2.0), atol=1e-12)

    def test_mse_hand_values(self):
        # K=2, p=(1,3), y=(0,0): L=(1+9)/2=5, grad=2(p-y)/K=(1,3)
        loss, grad = loss_and_grad([1.0, 3.0], [0.0, 0.0], "mse")
        assert loss == 5.0
        np.testing.assert_allclose(grad, [1.0, 3.0], atol=1e-15)

    def test_xent_rejects_bad_targets(self):
        with pytest.raises(ConfigError):
            loss_and_grad([0.5], [1.5], "xent")

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            loss_and_grad([0.5], [0.5], "huber")

    @pytest.mark.parametrize("kind", ["mse", "xent"])
    def test_gradient_matches_finite_differences(self, kind):
        rng = np.random.default_rng(3)
        for _ in range(20):
            k = int(rng.integers(1, 6))
            if kind == "xent":
                p = rng.uniform(0.05, 0.95, size=k)
                y = rng.uniform(0.0, 1.0, size=k)
            else:
                p = rng.normal(size=k)
                y = rng.normal(size=k)
            _, grad = loss_and_grad(p, y, kind)
            num = finite_diff_gradient(lambda q: loss_and_grad(q, y, kind)[0], p, 1e-6)
            denom = np.maximum.reduce([np.abs(grad), np.abs(num), np.full_like(num, 1e-8)])
            assert np.max(np.abs(grad - num) / denom) < 1e-6


def scalar_model():
    # One-parameter stand-in: reuse the smallest real model but touch only
    # the head bias, which Adam treats like any other leaf.
    return init_params(ModelSpec(input_dim=1, hidden1=1, hidden2=1, fc1=1, fc2=1), scheme="zeros")


def with_head_bias(model, value):
    model.head.b = np.array([value])
    return model


def grads_like(model, value):
    import copy

    g = copy.deepcopy(model)
    for _, leaf in model_leaves(g):
        leaf[...] = 0.0
    g.head.b = np.array([value])
    return g


class TestAdam:
    def test_zero_gradient_fixed_point(self):
        model = with_head_bias(scalar_model(), 0.5)
        state = AdamState.for_model(model)
        before = {name: leaf.copy() for name, leaf in model_leaves(model)}
        for _ in range(5):
            model, state = adam_step(model, grads_like(model, 0.0), state)
        for name, leaf in model_leaves(model):
            assert np.array_equal(leaf, before[name]), name

    def test_first_step_closed_form(self):
        # theta=0.5, g=2, alpha=1e-3: bias-corrected m1=g and sqrt(m2)=|g|,
        # so theta' = 0.5 - 0.001 * 2/(2 + 1e-8) ~ 0.499
        model = with_head_bias(scalar_model(), 0.5)
        state = AdamState.for_model(model, alpha=1e-3)
        model, state = adam_step(model, grads_like(model, 2.0), state)
        expected = 0.5 - 1e-3 * (2.0 / (2.0 + 1e-8))
        np.testing.assert_allclose(model.head.b, [expected], atol=1e-15)
        assert state.t == 1

    def test_constant_gradient_step_sizes(self):
        # For constant g the per-step move stays ~alpha and never grows.
        model = with_head_bias(scalar_model(), 0.5)
        state = AdamState.for_model(model, alpha=1e-3)
        prev = float(model.head.b[0])
        model, state = adam_step(model, grads_like(model, 2.0), state)
        step1 = abs(float(model.head.b[0]) - prev)
        prev = float(model.head.b[0])
        model, state = adam_step(model, grads_like(model, 2.0), state)
        step2 = abs(float(model.head.b[0]) - prev)
        assert step2 <= step1 * (1.0 + 1e-6)

    def test_alpha_zero_is_identity(self):
        rng = np.random.default_rng(10)
        model = random_model(rng, ModelSpec(input_dim=2, hidden1=2, hidden2=2, fc1=3, fc2=2))
        state = AdamState.for_model(model, alpha=0.0)
        before = {name: leaf.copy() for name, leaf in model_leaves(model)}
        grads = random_model(rng, ModelSpec(input_dim=2, hidden1=2, hidden2=2, fc1=3, fc2=2))
        for _ in range(3):
            model, state = adam_step(model, grads, state)
        for name, leaf in model_leaves(model):
            assert np.array_equal(leaf, before[name]), name

    def test_invalid_state_rejected(self):
        model = scalar_model()
        state = AdamState.for_model(model)
        state.beta1 = 1.0
        with pytest.raises(ConfigError):
            adam_step(model, grads_like(model, 1.0), state)


def make_window(inputs, target, day=dt.date(2020, 1, 1)):
    return FeatureWindow(
        inputs=np.asarray(inputs, dtype=np.float64),
        target=np.asarray(target, dtype=np.float64),
        anchor_date=day,
    )


class TestScaler:
    def test_midpoint(self):
        # feature range [10, 30]: 20 -> 0.5
        windows = [make_window([[10.0], [30.0]], [0.0]), make_window([[20.0], [25.0]], [10.0])]
        scaler = fit_scaler(windows)
        np.testing.assert_allclose(scaler.transform_features(np.array([[20.0]])), [[0.5]])

    def test_round_trip(self):
        windows = [make_window([[10.0], [30.0]], [5.0]), make_window([[12.0], [28.0]], [40.0])]
        scaler = fit_scaler(windows)
        np.testing.assert_allclose(scaler.invert_target(scaler.transform_target(17.3)), 17.3, atol=1e-12)

    def test_round_trip_property(self):
        rng = np.random.default_rng(2)
        windows = [
            make_window(rng.uniform(-5, 50, size=(4, 3)), rng.uniform(0, 300, size=2))
            for _ in range(10)
        ]
        scaler = fit_scaler(windows)
        for w in windows:
            x = scaler.transform_features(w.inputs)
            back = x * (scaler.feature_max - scaler.feature_min) + scaler.feature_min
            np.testing.assert_allclose(back, w.inputs, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(
                scaler.invert_target(scaler.transform_target(w.target)), w.target, rtol=1e-12
            )

    def test_extrapolation_no_clipping(self):
        # value 35 on range [10, 30] -> 1.25
        windows = [make_window([[10.0], [30.0]], [0.0, 1.0])]
        scaler = fit_scaler(windows)
        np.testing.assert_allclose(scaler.transform_features(np.array([[35.0]])), [[1.25]])

    def test_constant_feature_warns_and_maps_to_half(self):
        windows = [make_window([[7.0, 1.0], [7.0, 2.0]], [3.0])]
        with pytest.warns(UserWarning, match="constant feature"):
            scaler = fit_scaler(windows)
        out = scaler.transform_features(np.array([[7.0, 1.5], [9.0, 2.0]]))
        np.testing.assert_allclose(out[:, 0], [0.5, 0.5])


def linear_task_windows(n=200, seed=0):
    # Noiseless learnable task: y = 0.8 * x1 + 0.1 where x1 is the feature
    # on the last lookback day, so the target is a deterministic function
    # of the window.
    rng = np.random.default_rng(seed)
    x = np.cumsum(rng.normal(0, 0.3, size=n + 8)) + 10.0
    windows = []
    for a in range(8, n + 8):
        inputs = x[a - 8 : a, None]
        target = np.array([0.8 * x[a - 1] + 0.1])
        windows.append(make_window(inputs, target, dt.date(2020, 1, 1) + dt.timedelta(days=a)))
    return windows


class TestTrainLoop:
    def small_model(self, input_dim=1, horizon=1, seed=0):
        return init_params(
            ModelSpec(input_dim=input_dim, hidden1=6, hidden2=4, fc1=8, fc2=6, horizon=horizon),
            scheme="uniform",
            seed=seed,
        )

    def test_constant_target_loss_decreases(self):
        rng = np.random.default_rng(1)
        windows = [
            make_window(rng.normal(size=(4, 1)), [5.0]) for _ in range(32)
        ]
        scaler = fit_scaler(windows)
        X, Y = apply_scaler(scaler, windows)
        model = self.small_model()
        _, history = train(model, X, Y, TrainConfig(epochs=30, batch_size=8, seed=0))
        assert history[-1] < history[0]

    def test_linear_task_convergence(self):
        # Converges to within 10% relative error of the target mean on the
        # training data (threshold fixed from the first pinned run of this
        # pipeline: final MAE ~0.2% of the mean).
        windows = linear_task_windows()
        scaler = fit_scaler(windows)
        X, Y = apply_scaler(scaler, windows)
        model = self.small_model()
        model, history = train(model, X, Y, TrainConfig(epochs=100, batch_size=8, seed=0))
        from eadforecast.lstm import forward_batch

        pred_scaled, _ = forward_batch(model, X)
        preds = scaler.invert_target(pred_scaled[:, 0])
        actual = np.array([w.target[0] for w in windows])
        mae_counts = np.mean(np.abs(preds - actual))
        assert mae_counts < 0.10 * abs(actual.mean())

    def test_seed_reproducibility(self):
        windows = linear_task_windows(n=60)
        scaler = fit_scaler(windows)
        X, Y = apply_scaler(scaler, windows)
        cfg = TrainConfig(epochs=5, batch_size=8, seed=7)
        _, h1 = train(self.small_model(seed=7), X, Y, cfg)
        _, h2 = train(self.small_model(seed=7), X, Y, cfg)
        assert h1 == h2

    def test_smoothed_loss_trend_non_increasing(self):
        # Window-10 moving average of the loss never increases on a
        # noiseless learnable task.
        windows = linear_task_windows(n=120, seed=3)
        scaler = fit_scaler(windows)
        X, Y = apply_scaler(scaler, windows)
        _, history = train(self.small_model(seed=1), X, Y, TrainConfig(epochs=80, batch_size=8, seed=1))
        smooth = np.convolve(history, np.ones(10) / 10.0, mode="valid")
        assert np.all(np.diff(smooth) <= 1e-6)

    def test_non_finite_loss_aborts_with_location(self):
        windows = linear_task_windows(n=40)
        scaler = fit_scaler(windows)
        X, Y = apply_scaler(scaler, windows)
        X[5, 2, 0] = np.nan
        with pytest.raises(NumericalError, match="epoch 0"):
            train(self.small_model(), X, Y, TrainConfig(epochs=2, batch_size=8, seed=0, shuffle=False))

    def test_empty_dataset_rejected(self):
        with pytest.raises(ConfigError):
            train(self.small_model(), np.zeros((0, 4, 1)), np.zeros((0, 1)), TrainConfig(epochs=1))
