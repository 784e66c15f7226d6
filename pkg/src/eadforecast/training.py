"""Adam optimizer, min-max normalization, and the mini-batch training loop."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .losses import LOSS_KINDS, batch_loss_and_grad, loss_and_grad  # noqa: F401  (re-export)
from .lstm import (
    ForecastModel,
    ModelGrads,
    backward_batch,
    forward_batch,
    model_from_vector,
    model_leaves,
    model_to_vector,
)


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the model parameters.

    Moments are stored as one flat vector each (in the model's canonical
    leaf order) so the update is a handful of vector ops; the `m1`/`m2`
    properties expose them leaf-by-leaf with the model's exact shapes.
    """

    m1_flat: np.ndarray
    m2_flat: np.ndarray
    leaf_spec: tuple[tuple[str, tuple[int, ...]], ...]
    t: int = 0
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    _scratch: np.ndarray = field(default=None, repr=False, compare=False)

    @classmethod
    def for_model(cls, model: ForecastModel, alpha: float = 1e-3, **kwargs) -> "AdamState":
        spec = tuple((name, a.shape) for name, a in model_leaves(model))
        size = sum(int(np.prod(shape)) for _, shape in spec)
        return cls(
            m1_flat=np.zeros(size), m2_flat=np.zeros(size), leaf_spec=spec,
            alpha=alpha, **kwargs,
        )

    def _views(self, flat: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        pos = 0
        for name, shape in self.leaf_spec:
            size = int(np.prod(shape))
            out[name] = flat[pos : pos + size].reshape(shape)
            pos += size
        return out

    @property
    def m1(self) -> dict[str, np.ndarray]:
        return self._views(self.m1_flat)

    @property
    def m2(self) -> dict[str, np.ndarray]:
        return self._views(self.m2_flat)

    def validate(self) -> None:
        if self.t < 0 or not (0.0 <= self.beta1 < 1.0) or not (0.0 <= self.beta2 < 1.0):
            raise ConfigError("invalid Adam state: t >= 0 and betas in [0, 1) required")
        if self.epsilon <= 0:
            raise ConfigError("Adam epsilon must be positive")


def _adam_update_flat(theta: np.ndarray, g: np.ndarray, state: AdamState) -> None:
    """Apply one bias-corrected Adam update in place.

    theta, the moment buffers, and g are all mutated (g is used as scratch).
    """
    state.t += 1
    m1, m2 = state.m1_flat, state.m2_flat
    m1 *= state.beta1
    m1 += (1.0 - state.beta1) * g
    g *= g
    m2 *= state.beta2
    m2 += (1.0 - state.beta2) * g
    # update = alpha * m1_hat / (sqrt(m2_hat) + eps), reusing g as scratch
    if state._scratch is None or state._scratch.size != g.size:
        state._scratch = np.empty_like(g)
    np.divide(m2, 1.0 - state.beta2**state.t, out=g)
    np.sqrt(g, out=g)
    g += state.epsilon
    np.divide(m1, 1.0 - state.beta1**state.t, out=state._scratch)
    state._scratch *= state.alpha
    state._scratch /= g
    theta -= state._scratch


def adam_step(
    model: ForecastModel, grads: ModelGrads, state: AdamState
) -> tuple[ForecastModel, AdamState]:
    """One bias-corrected Adam update.

    Returns a fresh model; the moment buffers of the input state are updated
    in place and the same state object is returned, so callers must treat
    the passed-in state as consumed.
    """
    state.validate()
    g = model_to_vector(grads)
    theta = model_to_vector(model)
    if g.size != theta.size or theta.size != state.m1_flat.size:
        raise ConfigError("gradient/state size does not mirror the model")
    _adam_update_flat(theta, g, state)
    return model_from_vector(model, theta), state


# ---------------------------------------------------------------------------
# Min-max normalization
# ---------------------------------------------------------------------------


@dataclass
class MinMaxScaler:
    """Per-feature and target min/max learned from the training split only.

    Values are mapped linearly onto [0, 1] over the training range; out-of-range
    values extrapolate (no clipping). A constant column maps to 0.5.
    """

    feature_min: np.ndarray
    feature_max: np.ndarray
    target_min: float
    target_max: float

    def transform_features(self, x: np.ndarray) -> np.ndarray:
        rng = self.feature_max - self.feature_min
        out = np.empty_like(x, dtype=np.float64)
        for j in range(x.shape[-1]):
            if rng[j] > 0:
                out[..., j] = (x[..., j] - self.feature_min[j]) / rng[j]
            else:
                out[..., j] = 0.5
        return out

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        rng = self.target_max - self.target_min
        if rng > 0:
            return (np.asarray(y, dtype=np.float64) - self.target_min) / rng
        return np.full_like(np.asarray(y, dtype=np.float64), 0.5)

    def invert_target(self, y: np.ndarray) -> np.ndarray:
        rng = self.target_max - self.target_min
        return np.asarray(y, dtype=np.float64) * rng + self.target_min


def fit_scaler(windows) -> MinMaxScaler:
    """Learn feature/target ranges from training windows."""
    if not windows:
        raise ConfigError("cannot fit a scaler on an empty training set")
    inputs = np.concatenate([np.asarray(w.inputs, dtype=np.float64) for w in windows], axis=0)
    targets = np.concatenate([np.asarray(w.target, dtype=np.float64).ravel() for w in windows])
    fmin = inputs.min(axis=0)
    fmax = inputs.max(axis=0)
    constant = np.nonzero(fmax == fmin)[0]
    if constant.size:
        warnings.warn(
            f"constant feature column(s) {constant.tolist()} map to 0.5", stacklevel=2
        )
    tmin, tmax = float(targets.min()), float(targets.max())
    if tmax == tmin:
        warnings.warn("constant target maps to 0.5", stacklevel=2)
    return MinMaxScaler(feature_min=fmin, feature_max=fmax, target_min=tmin, target_max=tmax)


def apply_scaler(scaler: MinMaxScaler, windows) -> tuple[np.ndarray, np.ndarray]:
    """Stack windows into normalized arrays X (N, L, F) and Y (N, K)."""
    X = np.stack([scaler.transform_features(np.asarray(w.inputs, dtype=np.float64)) for w in windows])
    Y = np.stack([scaler.transform_target(np.asarray(w.target, dtype=np.float64)) for w in windows])
    return X, Y


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    epochs: int = 500
    batch_size: int = 8
    loss: str = "mse"
    lr: float = 1e-3
    seed: int = 0
    shuffle: bool = True
    log_every: int = 0  # epochs between progress callbacks; 0 disables
    progress: object = field(default=None, repr=False)  # callable(epoch, loss)

    def validate(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"unknown loss {self.loss!r}; expected one of {LOSS_KINDS}")


def train(
    model: ForecastModel, X: np.ndarray, Y: np.ndarray, config: TrainConfig
) -> tuple[ForecastModel, list[float]]:
    """Mini-batch training over normalized windows.

    X: (N, L, F) inputs, Y: (N, K) targets, both already scaled. Gradients are
    averaged within each batch so the learning rate is batch-size independent.
    Returns the trained model and the mean batch loss per epoch. Fully
    deterministic for a given config.seed.
    """
    config.validate()
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 3 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ConfigError(f"dataset shapes disagree: X {X.shape}, Y {Y.shape}")
    if X.shape[0] == 0:
        raise ConfigError("training set is empty")
    n = X.shape[0]
    rng = np.random.default_rng(config.seed)
    state = AdamState.for_model(model, alpha=config.lr)
    # Work on a flat parameter buffer; the model's leaves are views into it,
    # so the in-place Adam update is the only parameter write per batch.
    theta = model_to_vector(model)
    model = model_from_vector(model, theta, copy=False)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            y_hat, cache = forward_batch(model, X[batch])
            loss, dY = batch_loss_and_grad(y_hat, Y[batch], config.loss)
            if not np.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                )
            grads = backward_batch(model, cache, dY)
            _adam_update_flat(theta, model_to_vector(grads), state)
            epoch_losses.append(loss)
        history.append(float(np.mean(epoch_losses)))
        if config.log_every and config.progress and (epoch + 1) % config.log_every == 0:
            config.progress(epoch + 1, history[-1])
    return model_from_vector(model, theta), history
