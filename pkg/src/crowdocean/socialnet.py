"""Socialization classifier: a 3-10-2 MLP trained by scaled conjugate gradient.

Inputs are (collectivity, mean distance to others, social-space count); the two
softmax outputs are (p_social, p_not_social). Inputs are z-scored with
training-set statistics that travel with the weights.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    FormatError,
    InputError,
    InsufficientDataError,
    TrainingError,
    UsageError,
)

INPUT_DIM = 3
HIDDEN_DIM = 10
OUTPUT_DIM = 2
MODEL_VERSION = 1
MIN_SAMPLES = 10


class TrainingSample(NamedTuple):
    collectivity: float
    mean_distance: float
    n_social: float
    social: bool


def samples_to_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([(s.collectivity, s.mean_distance, s.n_social) for s in samples], dtype=float)
    y = np.array([bool(s.social) for s in samples], dtype=bool)
    return X.reshape(-1, INPUT_DIM), y


@dataclass
class TrainConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    sigma0: float = 1e-4
    lambda0: float = 1e-6
    split_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.sigma0 <= 0 or self.lambda0 <= 0:
            raise ConfigError("sigma0 and lambda0 must be > 0")


@dataclass(eq=False)
class MlpWeights:
    w_hidden: np.ndarray
    b_hidden: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray
    norm_mean: np.ndarray = field(default_factory=lambda: np.zeros(INPUT_DIM))
    norm_std: np.ndarray = field(default_factory=lambda: np.ones(INPUT_DIM))
    # None until trained; then seed, epochs, validation_accuracy, ...
    training_meta: dict | None = None

    def __post_init__(self):
        shapes = {
            "w_hidden": (HIDDEN_DIM, INPUT_DIM),
            "b_hidden": (HIDDEN_DIM,),
            "w_out": (OUTPUT_DIM, HIDDEN_DIM),
            "b_out": (OUTPUT_DIM,),
            "norm_mean": (INPUT_DIM,),
            "norm_std": (INPUT_DIM,),
        }
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} contains non-finite values")
            setattr(self, name, arr)
        if np.any(self.norm_std <= 0):
            raise InputError("norm_std must be positive")

    @property
    def trained(self) -> bool:
        return self.training_meta is not None

    @classmethod
    def zeros(cls) -> "MlpWeights":
        return cls.from_vector(np.zeros(n_params()))

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 0.5) -> "MlpWeights":
        return cls.from_vector(rng.uniform(-scale, scale, n_params()))

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.w_hidden.ravel(), self.b_hidden, self.w_out.ravel(), self.b_out]
        )

    @classmethod
    def from_vector(cls, v: np.ndarray, **extra) -> "MlpWeights":
        v = np.asarray(v, dtype=float)
        if v.shape != (n_params(),):
            raise DimensionError(f"weight vector has shape {v.shape}, expected ({n_params()},)")
        a = HIDDEN_DIM * INPUT_DIM
        b = a + HIDDEN_DIM
        c = b + OUTPUT_DIM * HIDDEN_DIM
        return cls(
            w_hidden=v[:a].reshape(HIDDEN_DIM, INPUT_DIM).copy(),
            b_hidden=v[a:b].copy(),
            w_out=v[b:c].reshape(OUTPUT_DIM, HIDDEN_DIM).copy(),
            b_out=v[c:].copy(),
            **extra,
        )

    def __eq__(self, other):
        if not isinstance(other, MlpWeights):
            return NotImplemented
        return (
            np.array_equal(self.to_vector(), other.to_vector())
            and np.array_equal(self.norm_mean, other.norm_mean)
            and np.array_equal(self.norm_std, other.norm_std)
            and self.training_meta == other.training_meta
        )


def n_params() -> int:
    return HIDDEN_DIM * INPUT_DIM + HIDDEN_DIM + OUTPUT_DIM * HIDDEN_DIM + OUTPUT_DIM


@dataclass
class EvalReport:
    accuracy: float
    true_social: int
    false_social: int
    true_not_social: int
    false_not_social: int

    @property
    def total(self) -> int:
        return self.true_social + self.false_social + self.true_not_social + self.false_not_social

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "true_social": self.true_social,
            "false_social": self.false_social,
            "true_not_social": self.true_not_social,
            "false_not_social": self.false_not_social,
        }


# --- network math on flat parameter vectors ---------------------------------

def _unpack(v: np.ndarray):
    a = HIDDEN_DIM * INPUT_DIM
    b = a + HIDDEN_DIM
    c = b + OUTPUT_DIM * HIDDEN_DIM
    return (
        v[:a].reshape(HIDDEN_DIM, INPUT_DIM),
        v[a:b],
        v[b:c].reshape(OUTPUT_DIM, HIDDEN_DIM),
        v[c:],
    )


def _targets(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.column_stack([y, 1.0 - y])


def _logits(v: np.ndarray, Xn: np.ndarray):
    W1, b1, W2, b2 = _unpack(v)
    H = np.tanh(Xn @ W1.T + b1)
    return H, H @ W2.T + b2


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def loss(v: np.ndarray, Xn: np.ndarray, T: np.ndarray) -> float:
    """Mean cross-entropy of one-hot targets ``T`` on standardized inputs ``Xn``."""
    _, Z = _logits(v, Xn)
    zmax = Z.max(axis=1, keepdims=True)
    logp = Z - zmax - np.log(np.exp(Z - zmax).sum(axis=1, keepdims=True))
    return float(-(T * logp).sum() / len(Xn))


def gradient(v: np.ndarray, Xn: np.ndarray, T: np.ndarray) -> np.ndarray:
    W1, b1, W2, b2 = _unpack(v)
    H, Z = _logits(v, Xn)
    dZ = (softmax(Z) - T) / len(Xn)
    dW2 = dZ.T @ H
    db2 = dZ.sum(axis=0)
    dA = (dZ @ W2) * (1.0 - H * H)
    dW1 = dA.T @ Xn
    db1 = dA.sum(axis=0)
    return np.concatenate([dW1.ravel(), db1, dW2.ravel(), db2])


def standardize(weights: MlpWeights, X: np.ndarray) -> np.ndarray:
    return (X - weights.norm_mean) / weights.norm_std


def forward_batch(weights: MlpWeights, X: np.ndarray) -> np.ndarray:
    """(N, 2) array of (p_social, p_not_social) for raw input rows ``X``."""
    X = np.asarray(X, dtype=float).reshape(-1, INPUT_DIM)
    if not np.all(np.isfinite(X)):
        raise InputError("network input contains non-finite values")
    _, Z = _logits(weights.to_vector(), standardize(weights, X))
    return softmax(Z)


def forward(weights: MlpWeights, x) -> tuple[float, float]:
    p = forward_batch(weights, np.asarray(x, dtype=float).reshape(1, INPUT_DIM))[0]
    return float(p[0]), float(p[1])


# --- scaled conjugate gradient -----------------------------------------------

@dataclass
class ScgResult:
    x: np.ndarray
    loss: float
    iterations: int
    converged: bool
    loss_history: list[float]


def scg_minimize(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    max_iterations: int = 500,
    gradient_tolerance: float = 1e-6,
    sigma0: float = 1e-4,
    lambda0: float = 1e-6,
) -> ScgResult:
    """Moller's scaled conjugate gradient (1993), without line search.

    The curvature along the search direction is a one-sided finite difference of
    the gradient; a Levenberg-Marquardt term keeps it positive, and its scale is
    adapted from the ratio of actual to predicted loss reduction. ``loss_history``
    holds the loss after every accepted step, so it never increases.
    """
    w = np.array(x0, dtype=float)
    n = len(w)
    fw = f(w)
    if not math.isfinite(fw):
        raise TrainingError("initial loss is not finite", iteration=0)
    r = -grad(w)
    p = r.copy()
    lam, lam_bar = lambda0, 0.0
    success = True
    n_success = 0
    delta = 0.0
    history = [fw]
    converged = False

    k = 0
    while k < max_iterations:
        if np.linalg.norm(r) < gradient_tolerance:
            converged = True
            break
        k += 1
        p_sq = float(p @ p)
        if p_sq < 1e-300:
            converged = True
            break
        if success:
            mu = float(p @ r)
            if mu <= 0:
                # lost conjugacy; fall back to steepest descent
                p = r.copy()
                p_sq = float(p @ p)
                mu = float(p @ r)
            sigma = sigma0 / math.sqrt(p_sq)
            s = (grad(w + sigma * p) - (-r)) / sigma
            delta = float(p @ s)

        delta += (lam - lam_bar) * p_sq
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p_sq)
            delta = -delta + lam * p_sq
            lam = lam_bar

        mu = float(p @ r)
        alpha = mu / delta
        w_new = w + alpha * p
        f_new = f(w_new)
        if not math.isfinite(f_new):
            raise TrainingError("loss became non-finite", iteration=k)
        Delta = 2.0 * delta * (fw - f_new) / (mu * mu)

        if Delta >= 0:
            w, fw = w_new, f_new
            r_new = -grad(w)
            if not np.all(np.isfinite(r_new)):
                raise TrainingError("gradient became non-finite", iteration=k)
            lam_bar = 0.0
            success = True
            n_success += 1
            history.append(fw)
            if n_success % n == 0:
                p = r_new.copy()
            else:
                beta = (float(r_new @ r_new) - float(r_new @ r)) / mu
                p = r_new + beta * p
            r = r_new
            if Delta >= 0.75:
                lam = lam / 4.0
        else:
            lam_bar = lam
            success = False

        if Delta < 0.25:
            lam = lam + delta * (1.0 - Delta) / p_sq
    else:
        converged = bool(np.linalg.norm(r) < gradient_tolerance)

    return ScgResult(w, fw, k, converged, history)


# --- dataset handling, training, evaluation ----------------------------------

def split_dataset(X: np.ndarray, y: np.ndarray, config: TrainConfig):
    """Seeded shuffle then split at ``config.split_fraction``.

    The training part keeps at least one sample of every class present overall;
    the validation part always keeps at least one sample.
    """
    X = np.asarray(X, dtype=float).reshape(-1, INPUT_DIM)
    y = np.asarray(y, dtype=bool)
    n = len(X)
    if n < MIN_SAMPLES:
        raise InsufficientDataError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if len(y) != n:
        raise InputError("inputs and labels differ in length")
    if y.all() or not y.any():
        warnings.warn("training set contains a single class", stacklevel=2)

    rng = np.random.default_rng(config.seed)
    idx = rng.permutation(n)
    n_train = min(max(int(math.floor(n * config.split_fraction)), 1), n - 1)
    train, val = idx[:n_train].copy(), idx[n_train:].copy()

    for cls in (True, False):
        if (y == cls).any() and not (y[train] == cls).any():
            j = np.flatnonzero(y[val] == cls)[0]
            swap = n_train - 1  # last training slot; its class has n_train >= 2 members or none
            train[swap], val[j] = val[j], train[swap]
    return (X[train], y[train]), (X[val], y[val])


def evaluate(weights: MlpWeights, X: np.ndarray, y: np.ndarray) -> EvalReport:
    y = np.asarray(y, dtype=bool)
    if len(y) == 0:
        raise InsufficientDataError("cannot evaluate on an empty sample set")
    P = forward_batch(weights, X)
    pred = np.argmax(P, axis=1) == 0
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    tn = int(np.sum(~pred & ~y))
    fn = int(np.sum(~pred & y))
    return EvalReport((tp + tn) / len(y), tp, fp, tn, fn)


def scg_train(X: np.ndarray, y: np.ndarray, config: TrainConfig | None = None):
    """Train on a seeded split of (X, y); returns (weights, validation report).

    ``weights.training_meta`` records seed, iterations, accepted-step losses
    and train/validation accuracy.
    """
    config = config or TrainConfig()
    (Xtr, ytr), (Xva, yva) = split_dataset(X, y, config)

    mean = Xtr.mean(axis=0)
    std = Xtr.std(axis=0)
    std[std == 0] = 1.0
    Xn = (Xtr - mean) / std
    T = _targets(ytr)

    rng = np.random.default_rng(config.seed)
    w0 = rng.uniform(-0.5, 0.5, n_params())
    result = scg_minimize(
        lambda v: loss(v, Xn, T),
        lambda v: gradient(v, Xn, T),
        w0,
        max_iterations=config.max_iterations,
        gradient_tolerance=config.gradient_tolerance,
        sigma0=config.sigma0,
        lambda0=config.lambda0,
    )
    weights = MlpWeights.from_vector(result.x, norm_mean=mean, norm_std=std)
    train_report = evaluate(weights, Xtr, ytr)
    val_report = evaluate(weights, Xva, yva)
    weights.training_meta = {
        "seed": config.seed,
        "epochs": result.iterations,
        "accepted_steps": len(result.loss_history) - 1,
        "converged": result.converged,
        "initial_loss": result.loss_history[0],
        "final_loss": result.loss,
        "train_samples": len(ytr),
        "validation_samples": len(yva),
        "train_accuracy": train_report.accuracy,
        "validation_accuracy": val_report.accuracy,
    }
    return weights, val_report


def predict_socialization_batch(weights: MlpWeights, X: np.ndarray) -> np.ndarray:
    if not weights.trained:
        raise UsageError("model is untrained; train or load a trained model first")
    return forward_batch(weights, X)[:, 0]


def predict_socialization(
    weights: MlpWeights, collectivity: float, mean_distance: float, n_social: float
) -> tuple[float, float]:
    """Socialization level and its complement, the isolation level."""
    social = float(predict_socialization_batch(weights, [collectivity, mean_distance, n_social])[0])
    return social, 1.0 - social


# --- persistence --------------------------------------------------------------

def model_to_dict(weights: MlpWeights) -> dict:
    return {
        "version": MODEL_VERSION,
        "dims": [INPUT_DIM, HIDDEN_DIM, OUTPUT_DIM],
        "w_hidden": weights.w_hidden.tolist(),
        "b_hidden": weights.b_hidden.tolist(),
        "w_out": weights.w_out.tolist(),
        "b_out": weights.b_out.tolist(),
        "norm_mean": weights.norm_mean.tolist(),
        "norm_std": weights.norm_std.tolist(),
        "training_meta": weights.training_meta,
    }


def save_model(weights: MlpWeights) -> bytes:
    return (json.dumps(model_to_dict(weights), indent=2) + "\n").encode()


def load_model(data: bytes | str) -> MlpWeights:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("model file must hold a JSON object")
    if doc.get("version") != MODEL_VERSION:
        raise FormatError(f"unsupported model version {doc.get('version')!r}")
    if doc.get("dims") != [INPUT_DIM, HIDDEN_DIM, OUTPUT_DIM]:
        raise DimensionError(
            f"model dims {doc.get('dims')!r} differ from {[INPUT_DIM, HIDDEN_DIM, OUTPUT_DIM]}"
        )
    keys = ("w_hidden", "b_hidden", "w_out", "b_out", "norm_mean", "norm_std")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise FormatError(f"model file missing {', '.join(missing)}")
    try:
        arrays = {k: np.array(doc[k], dtype=float) for k in keys}
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed weight array: {exc}") from exc
    return MlpWeights(**arrays, training_meta=doc.get("training_meta"))
