"""Models of the conditional event probability P(Y <= C | T=t, X=x).

Five variants share the same predict surface: a closed-form oracle, the
randomized prior construction, an L2-penalized logistic regression on (T, X),
a small ReLU network trained with Adam, and a Nadaraya-Watson regressor on
the joint (time, covariate) space. Features are min-max scaled to [0, 1]
with training-set ranges stored inside the model, and every fitted model is
immutable and picklable to a self-describing JSON text file.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import Dataset
from .errors import EmptyNeighborhood, NonFiniteLoss
from .kernels import KernelSpec, kernel_profile

__all__ = [
    "TrainingConfig",
    "FeatureScaler",
    "ProbabilityModel",
    "OracleModel",
    "LogisticModel",
    "MLPModel",
    "NadarayaWatsonModel",
    "prior_indicator",
    "fit_logistic",
    "fit_mlp",
    "fit_nadaraya_watson",
    "predict",
    "save_model",
    "load_model",
    "mlp_loss_and_grads",
    "logistic_loss_and_grad",
]


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 200
    learning_rate: float = 0.001
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    batch_size: int = 128
    seed: int = 0
    l2_penalty: float | None = None  # logistic only; defaults to 1/n at fit

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def prior_indicator(delta, q, noise):
    """Randomized soft indicator q^2 + delta (1 - q) + noise, clamped to [0, 1].

    With noise off, averaging over delta ~ Bernoulli(q) returns q exactly
    (q^2 + q(1 - q) = q), so the construction is conditionally unbiased for
    the event probability while differing from it sample by sample.
    """
    q = np.asarray(q, dtype=float)
    delta = np.asarray(delta, dtype=float)
    return np.clip(q * q + delta * (1.0 - q) + np.asarray(noise, float), 0.0, 1.0)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature min-max scaling of the stacked (T, X) feature matrix."""

    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def fit(cls, feats: np.ndarray) -> "FeatureScaler":
        return cls(feats.min(axis=0), feats.max(axis=0))

    def transform(self, feats: np.ndarray) -> np.ndarray:
        span = self.maxs - self.mins
        span = np.where(span > 0, span, 1.0)
        return (feats - self.mins) / span


def _features(t, x) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = np.broadcast_to(x, (t.size, x.size))
    return np.column_stack([t, x])


class ProbabilityModel:
    """Fit/predict abstraction mapping (t, x) to a probability in [0, 1]."""

    variant = "base"

    def predict(self, t, x):
        raise NotImplementedError

    def _payload(self) -> dict:
        raise NotImplementedError


class OracleModel(ProbabilityModel):
    """Wraps a closed-form probability function p(t, x)."""

    variant = "oracle"

    def __init__(self, fn):
        self._fn = fn

    def predict(self, t, x):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = np.broadcast_to(x, (t.size, x.size))
        out = np.clip(np.asarray(self._fn(t, x), dtype=float), 0.0, 1.0)
        return out

    def _payload(self):
        raise TypeError("oracle models hold a closure and cannot be serialized")


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bce(z, y):
    # mean of softplus(z) - y z, numerically stable for large |z|
    return float(np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))


class LogisticModel(ProbabilityModel):
    """Penalized logistic regression on scaled (T, X); coefficient layout is
    (bias, t-weight, x-weights...)."""

    variant = "logistic"

    def __init__(self, coef: np.ndarray, scaler: FeatureScaler,
                 single_class: bool = False):
        self.coef = np.asarray(coef, dtype=float)
        self.scaler = scaler
        self.single_class = bool(single_class)

    def predict(self, t, x):
        z = self.scaler.transform(_features(t, x))
        return _sigmoid(self.coef[0] + z @ self.coef[1:])

    def _payload(self):
        return {
            "coef": self.coef.tolist(),
            "mins": self.scaler.mins.tolist(),
            "maxs": self.scaler.maxs.tolist(),
            "single_class": self.single_class,
        }


def logistic_loss_and_grad(coef, feats, y, lam):
    """Penalized mean binary cross-entropy and its gradient; the bias term
    (first coefficient) is unpenalized."""
    z = coef[0] + feats @ coef[1:]
    p = _sigmoid(z)
    loss = _bce(z, y) + 0.5 * lam * float(coef[1:] @ coef[1:])
    resid = (p - y) / y.size
    grad = np.concatenate([[resid.sum()], feats.T @ resid + lam * coef[1:]])
    return loss, grad


def fit_logistic(data: Dataset, config: TrainingConfig = TrainingConfig()) -> LogisticModel:
    """Newton fit of the ridge-penalized logistic model.

    When only one class is present the model degenerates to the constant
    empirical rate (``single_class`` flag set) instead of failing.
    """
    if not data.hard:
        raise ValueError("classifier training requires hard indicators")
    feats_raw = _features(data.t, data.x)
    scaler = FeatureScaler.fit(feats_raw)
    feats = scaler.transform(feats_raw)
    y = data.indicator
    if np.all(y == y[0]):
        rate = float(np.clip(y.mean(), 1e-12, 1.0 - 1e-12))
        coef = np.zeros(feats.shape[1] + 1)
        coef[0] = np.log(rate / (1.0 - rate))
        return LogisticModel(coef, scaler, single_class=True)

    n = y.size
    lam = config.l2_penalty if config.l2_penalty is not None else 1.0 / n
    coef = np.zeros(feats.shape[1] + 1)
    z_mat = np.column_stack([np.ones(n), feats])
    pen = np.full(coef.size, lam)
    pen[0] = 0.0
    loss, grad = logistic_loss_and_grad(coef, feats, y, lam)
    for _ in range(100):
        if np.max(np.abs(grad)) < 1e-10:
            break
        p = _sigmoid(z_mat @ coef)
        w = p * (1.0 - p)
        hess = (z_mat.T * w) @ z_mat / n + np.diag(pen)
        step = np.linalg.solve(hess + 1e-12 * np.eye(coef.size), grad)
        scale = 1.0
        for _ in range(50):
            trial = coef - scale * step
            new_loss, new_grad = logistic_loss_and_grad(trial, feats, y, lam)
            if new_loss <= loss:
                coef, loss, grad = trial, new_loss, new_grad
                break
            scale *= 0.5
        else:
            break
    return LogisticModel(coef, scaler)


class MLPModel(ProbabilityModel):
    """Two ReLU hidden layers of 100 units, sigmoid output."""

    variant = "mlp"

    def __init__(self, params, scaler: FeatureScaler):
        self.params = [(np.asarray(w, float), np.asarray(b, float)) for w, b in params]
        self.scaler = scaler

    def predict(self, t, x):
        z = self.scaler.transform(_features(t, x))
        return _sigmoid(_mlp_logits(self.params, z))

    def _payload(self):
        return {
            "layers": [[w.tolist(), b.tolist()] for w, b in self.params],
            "mins": self.scaler.mins.tolist(),
            "maxs": self.scaler.maxs.tolist(),
        }


def _mlp_logits(params, feats):
    a = feats
    for w, b in params[:-1]:
        a = np.maximum(a @ w + b, 0.0)
    w, b = params[-1]
    return (a @ w + b)[:, 0]


def mlp_loss_and_grads(params, feats, y):
    """Mean binary cross-entropy and per-layer gradients (backpropagation)."""
    acts = [feats]
    a = feats
    for w, b in params[:-1]:
        a = np.maximum(a @ w + b, 0.0)
        acts.append(a)
    w, b = params[-1]
    z = (a @ w + b)[:, 0]
    loss = _bce(z, y)
    dz = ((_sigmoid(z) - y) / y.size)[:, None]
    grads = [None] * len(params)
    grads[-1] = (acts[-1].T @ dz, dz.sum(axis=0))
    da = dz @ w.T
    for li in range(len(params) - 2, -1, -1):
        dhidden = da * (acts[li + 1] > 0)
        grads[li] = (acts[li].T @ dhidden, dhidden.sum(axis=0))
        da = dhidden @ params[li][0].T
    return loss, grads


def _he_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def fit_mlp(data: Dataset, config: TrainingConfig = TrainingConfig(),
            hidden: tuple = (100, 100)) -> MLPModel:
    """Minibatch Adam training of the ReLU classifier, deterministic per seed."""
    if not data.hard:
        raise ValueError("classifier training requires hard indicators")
    if data.n < 10:
        raise ValueError("MLP training needs n >= 10")
    feats_raw = _features(data.t, data.x)
    scaler = FeatureScaler.fit(feats_raw)
    feats = scaler.transform(feats_raw)
    y = data.indicator

    rng = np.random.default_rng(config.seed)
    dims = [feats.shape[1], *hidden, 1]
    params = [(_he_uniform(rng, dims[i], dims[i + 1]), np.zeros(dims[i + 1]))
              for i in range(len(dims) - 1)]

    beta1, beta2 = config.adam_betas
    eps = config.adam_eps
    m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
    v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
    step = 0
    n = y.size
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            loss, grads = mlp_loss_and_grads(params, feats[idx], y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss("training loss diverged")
            step += 1
            corr1 = 1.0 - beta1 ** step
            corr2 = 1.0 - beta2 ** step
            new_params = []
            for li, (w, b) in enumerate(params):
                gw, gb = grads[li]
                mw = beta1 * m[li][0] + (1 - beta1) * gw
                mb = beta1 * m[li][1] + (1 - beta1) * gb
                vw = beta2 * v[li][0] + (1 - beta2) * gw * gw
                vb = beta2 * v[li][1] + (1 - beta2) * gb * gb
                m[li] = (mw, mb)
                v[li] = (vw, vb)
                lr = config.learning_rate
                new_params.append((
                    w - lr * (mw / corr1) / (np.sqrt(vw / corr2) + eps),
                    b - lr * (mb / corr1) / (np.sqrt(vb / corr2) + eps),
                ))
            params = new_params
    return MLPModel(params, scaler)


class NadarayaWatsonModel(ProbabilityModel):
    """Kernel-weighted mean of the event indicator over scaled (T, X) space."""

    variant = "nadaraya_watson"

    def __init__(self, t, x, delta, b: float, scaler: FeatureScaler,
                 spec: KernelSpec = KernelSpec()):
        self.train_feats = scaler.transform(_features(t, x))
        self.delta = np.asarray(delta, dtype=float)
        self.b = float(b)
        self.scaler = scaler
        self.spec = spec
        self._raw = (np.asarray(t, float), np.asarray(x, float))

    def predict(self, t, x):
        q = self.scaler.transform(_features(t, x))
        diff = q[:, None, :] - self.train_feats[None, :, :]
        if self.spec.multivariate_mode == "radial":
            k = kernel_profile(np.linalg.norm(diff, axis=-1) / self.b, self.spec.family)
        else:
            k = np.prod(kernel_profile(diff / self.b, self.spec.family), axis=-1)
        total = k.sum(axis=1)
        if np.any(total <= 0.0):
            raise EmptyNeighborhood("no training point within the joint bandwidth")
        return np.clip(k @ self.delta / total, 0.0, 1.0)

    def _payload(self):
        t, x = self._raw
        return {
            "t": t.tolist(),
            "x": x.tolist(),
            "delta": self.delta.tolist(),
            "b": self.b,
            "mins": self.scaler.mins.tolist(),
            "maxs": self.scaler.maxs.tolist(),
            "family": self.spec.family,
            "mode": self.spec.multivariate_mode,
        }


def fit_nadaraya_watson(data: Dataset, b: float,
                        spec: KernelSpec = KernelSpec(),
                        h_reference: float | None = None) -> NadarayaWatsonModel:
    """Store the training sample and bandwidth; prediction is lazy.

    Consistency of the downstream plug-in estimator needs the covariate
    bandwidth to shrink faster than ``b``; a warning is emitted when a
    reference h is supplied with b <= h.
    """
    if not data.hard:
        raise ValueError("the regressor smooths hard event indicators")
    if b <= 0:
        raise ValueError("bandwidth b must be positive")
    if h_reference is not None and b <= h_reference:
        warnings.warn(
            f"joint bandwidth b={b} <= covariate bandwidth h={h_reference}; "
            "the plug-in theory expects h = o(b)", stacklevel=2)
    feats_raw = _features(data.t, data.x)
    scaler = FeatureScaler.fit(feats_raw)
    return NadarayaWatsonModel(data.t, data.x, data.indicator, b, scaler, spec)


def predict(model: ProbabilityModel, t, x):
    """Module-level predict surface; always returns values in [0, 1]."""
    return np.clip(model.predict(t, x), 0.0, 1.0)


def save_model(model: ProbabilityModel, path):
    """Serialize a fitted model to self-describing JSON text (exact float
    round-trip via repr-based formatting)."""
    doc = {"variant": model.variant, "payload": model._payload()}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> ProbabilityModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    variant = doc.get("variant")
    pl = doc.get("payload", {})
    if variant == "logistic":
        scaler = FeatureScaler(np.asarray(pl["mins"]), np.asarray(pl["maxs"]))
        return LogisticModel(np.asarray(pl["coef"]), scaler, pl.get("single_class", False))
    if variant == "mlp":
        scaler = FeatureScaler(np.asarray(pl["mins"]), np.asarray(pl["maxs"]))
        return MLPModel([(np.asarray(w), np.asarray(b)) for w, b in pl["layers"]], scaler)
    if variant == "nadaraya_watson":
        scaler = FeatureScaler(np.asarray(pl["mins"]), np.asarray(pl["maxs"]))
        return NadarayaWatsonModel(
            np.asarray(pl["t"]), np.asarray(pl["x"]), np.asarray(pl["delta"]),
            pl["b"], scaler, KernelSpec(pl["family"], pl["mode"]))
    raise ValueError(f"unknown model variant {variant!r}")
