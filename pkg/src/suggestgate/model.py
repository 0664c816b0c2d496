"""Acceptance classifier: weighted-BCE logistic reference and boosted trees.

Training is full-batch and deterministic; a trained model is an immutable
value object that serializes to versioned JSON and refuses to load when the
format or feature contract does not match.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import Split
from .errors import (
    Divergence,
    FeatureMismatch,
    LengthMismatch,
    ModelFormatError,
)
from .features import FEATURE_NAMES, FeatureVector

MODEL_FORMAT_VERSION = "suggestgate-model/1"

_PROB_CLIP = 1e-12
DEFAULT_TAU = 0.1


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _clip_probs(p):
    return np.clip(p, _PROB_CLIP, 1.0 - _PROB_CLIP)


def weighted_bce(preds, labels, weights: tuple[float, float]) -> float:
    """Total weighted binary cross-entropy (sum over samples).

    -sum_i w_{y_i} [y_i ln f_i + (1-y_i) ln(1-f_i)], with predictions
    clipped to [1e-12, 1-1e-12] so the loss is finite for any input.
    """
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if preds.shape != labels.shape:
        raise LengthMismatch(f"{preds.shape} predictions vs {labels.shape} labels")
    f = _clip_probs(preds)
    w = np.where(labels == 1.0, weights[1], weights[0])
    return float(-np.sum(w * (labels * np.log(f) + (1.0 - labels) * np.log(1.0 - f))))


def weighted_bce_mean(preds, labels, weights: tuple[float, float]) -> float:
    """Per-sample mean of the weighted BCE, for reporting and training."""
    n = len(np.asarray(preds))
    return weighted_bce(preds, labels, weights) / n


@dataclass(frozen=True)
class LogisticHyper:
    lr: float = 0.5
    epochs: int = 500
    l2: float = 1e-4
    seed: int = 0


@dataclass(frozen=True)
class TreeHyper:
    n_trees: int = 200
    depth: int = 4
    lr: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class AcceptanceModel:
    """Trained classifier artifact: feature contract, scaling, parameters, tau."""

    feature_names: tuple[str, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]
    kind: str  # "logistic" | "tree_ensemble"
    parameters: dict
    tau: float = DEFAULT_TAU
    version: str = MODEL_FORMAT_VERSION

    def with_tau(self, tau: float) -> "AcceptanceModel":
        return AcceptanceModel(
            feature_names=self.feature_names,
            mean=self.mean,
            std=self.std,
            kind=self.kind,
            parameters=self.parameters,
            tau=tau,
            version=self.version,
        )


def _standardization(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return mean, std


def _standardize(X: np.ndarray, model: AcceptanceModel) -> np.ndarray:
    return (X - np.asarray(model.mean)) / np.asarray(model.std)


def split_to_arrays(records) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([r.x for r in records], dtype=float)
    y = np.array([r.y for r in records], dtype=float)
    return X, y


# --- logistic ----------------------------------------------------------


def _logistic_loss_grad(
    theta: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    weights: tuple[float, float],
    l2: float,
) -> tuple[float, np.ndarray]:
    """Mean weighted BCE plus l2*||w||^2 (bias unpenalized), with gradient."""
    n = X.shape[0]
    w_vec = np.where(y == 1.0, weights[1], weights[0])
    z = X @ theta[:-1] + theta[-1]
    p = _clip_probs(_sigmoid(z))
    loss = -np.mean(w_vec * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
    loss += l2 * float(theta[:-1] @ theta[:-1])
    residual = w_vec * (p - y)
    grad = np.empty_like(theta)
    grad[:-1] = (X.T @ residual) / n + 2.0 * l2 * theta[:-1]
    grad[-1] = residual.mean()
    return float(loss), grad


def fit_logistic(
    X,
    y,
    weights: tuple[float, float],
    hyper: LogisticHyper = LogisticHyper(),
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> AcceptanceModel:
    """Full-batch gradient descent on the weighted BCE from zero init.

    The learning rate halves whenever a step would increase the loss, so
    the recorded training loss is non-increasing across epochs.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    mean, std = _standardization(X)
    Xs = (X - mean) / std

    theta = np.zeros(X.shape[1] + 1)
    lr = hyper.lr
    loss, grad = _logistic_loss_grad(theta, Xs, y, weights, hyper.l2)
    for _ in range(hyper.epochs):
        candidate = theta - lr * grad
        new_loss, new_grad = _logistic_loss_grad(candidate, Xs, y, weights, hyper.l2)
        if not math.isfinite(new_loss):
            raise Divergence(f"loss became non-finite (lr={lr})")
        if new_loss > loss:
            lr *= 0.5
            continue
        theta, loss, grad = candidate, new_loss, new_grad

    return AcceptanceModel(
        feature_names=tuple(feature_names),
        mean=tuple(float(v) for v in mean),
        std=tuple(float(v) for v in std),
        kind="logistic",
        parameters={
            "weights": [float(v) for v in theta[:-1]],
            "bias": float(theta[-1]),
        },
    )


def train_logistic(
    split: Split,
    weights: tuple[float, float],
    hyper: LogisticHyper = LogisticHyper(),
) -> AcceptanceModel:
    X, y = split_to_arrays(split.train)
    return fit_logistic(X, y, weights, hyper)


# --- gradient-boosted trees --------------------------------------------

_SPLIT_LAMBDA = 1e-6
_MIN_GAIN = 1e-12


def _fit_tree(
    X: np.ndarray, g: np.ndarray, h: np.ndarray, idx: np.ndarray, depth: int
) -> dict:
    g_sum = float(g[idx].sum())
    h_sum = float(h[idx].sum())
    leaf = {"value": g_sum / (h_sum + _SPLIT_LAMBDA)}
    if depth == 0 or idx.size < 2:
        return leaf

    base_score = g_sum * g_sum / (h_sum + _SPLIT_LAMBDA)
    best_gain = _MIN_GAIN
    best = None
    for j in range(X.shape[1]):
        xs = X[idx, j]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        gl = np.cumsum(g[idx][order])[:-1]
        hl = np.cumsum(h[idx][order])[:-1]
        valid = xs_sorted[:-1] < xs_sorted[1:]
        if not valid.any():
            continue
        gr = g_sum - gl
        hr = h_sum - hl
        gain = (
            gl * gl / (hl + _SPLIT_LAMBDA)
            + gr * gr / (hr + _SPLIT_LAMBDA)
            - base_score
        )
        gain = np.where(valid, gain, -np.inf)
        pos = int(np.argmax(gain))
        if gain[pos] > best_gain:
            best_gain = float(gain[pos])
            threshold = 0.5 * (xs_sorted[pos] + xs_sorted[pos + 1])
            best = (j, float(threshold))
    if best is None:
        return leaf

    j, threshold = best
    mask = X[idx, j] <= threshold
    left_idx = idx[mask]
    right_idx = idx[~mask]
    if left_idx.size == 0 or right_idx.size == 0:
        return leaf
    return {
        "feature": j,
        "threshold": threshold,
        "left": _fit_tree(X, g, h, left_idx, depth - 1),
        "right": _fit_tree(X, g, h, right_idx, depth - 1),
    }


def _eval_tree(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        current, idx = stack.pop()
        if "value" in current:
            out[idx] = current["value"]
            continue
        mask = X[idx, current["feature"]] <= current["threshold"]
        stack.append((current["left"], idx[mask]))
        stack.append((current["right"], idx[~mask]))
    return out


def fit_tree_ensemble(
    X,
    y,
    weights: tuple[float, float],
    hyper: TreeHyper = TreeHyper(),
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> AcceptanceModel:
    """Stagewise boosting of depth-limited trees on the weighted log-loss.

    Each stage fits a tree to the negative gradient with Newton leaf
    values; a stage that would raise the training loss is shrunk (halved up
    to ten times) and dropped if it never helps, so the per-stage training
    loss is non-increasing.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    mean, std = _standardization(X)
    Xs = (X - mean) / std
    w_vec = np.where(y == 1.0, weights[1], weights[0])

    base_rate = float(np.sum(w_vec * y) / np.sum(w_vec))
    base_rate = min(max(base_rate, _PROB_CLIP), 1.0 - _PROB_CLIP)
    base_score = math.log(base_rate / (1.0 - base_rate))

    scores = np.full(X.shape[0], base_score)
    loss = weighted_bce_mean(_sigmoid(scores), y, weights)
    trees: list[dict] = []
    all_idx = np.arange(X.shape[0])
    for _ in range(hyper.n_trees):
        p = _clip_probs(_sigmoid(scores))
        g = w_vec * (y - p)
        h = w_vec * p * (1.0 - p)
        root = _fit_tree(Xs, g, h, all_idx, hyper.depth)
        step = _eval_tree(root, Xs)
        scale = hyper.lr
        accepted = False
        for _ in range(10):
            new_loss = weighted_bce_mean(_sigmoid(scores + scale * step), y, weights)
            if not math.isfinite(new_loss):
                raise Divergence("boosting loss became non-finite")
            if new_loss <= loss:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            scale = 0.0
            new_loss = loss
        trees.append({"scale": scale, "root": root})
        if scale != 0.0:
            scores = scores + scale * step
        loss = new_loss

    return AcceptanceModel(
        feature_names=tuple(feature_names),
        mean=tuple(float(v) for v in mean),
        std=tuple(float(v) for v in std),
        kind="tree_ensemble",
        parameters={"base_score": base_score, "trees": trees},
    )


def train_tree_ensemble(
    split: Split,
    weights: tuple[float, float],
    hyper: TreeHyper = TreeHyper(),
) -> AcceptanceModel:
    X, y = split_to_arrays(split.train)
    return fit_tree_ensemble(X, y, weights, hyper)


# --- prediction --------------------------------------------------------


def _coerce_matrix(model: AcceptanceModel, x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        x = x.values
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != len(model.feature_names):
        raise FeatureMismatch(
            f"vector has {arr.shape[1]} features, model expects {len(model.feature_names)}"
        )
    return arr


def predict_proba_batch(model: AcceptanceModel, X) -> np.ndarray:
    Xs = _standardize(_coerce_matrix(model, X), model)
    if model.kind == "logistic":
        z = Xs @ np.asarray(model.parameters["weights"]) + model.parameters["bias"]
    elif model.kind == "tree_ensemble":
        z = np.full(Xs.shape[0], float(model.parameters["base_score"]))
        for tree in model.parameters["trees"]:
            if tree["scale"] != 0.0:
                z = z + tree["scale"] * _eval_tree(tree["root"], Xs)
    else:
        raise ModelFormatError(f"unknown model kind {model.kind!r}")
    return _clip_probs(_sigmoid(z))


def predict_proba(model: AcceptanceModel, x) -> float:
    """Predicted acceptance probability for one feature vector."""
    return float(predict_proba_batch(model, x)[0])


# --- serialization -----------------------------------------------------


def save_model(model: AcceptanceModel, path) -> None:
    payload = {
        "format_version": model.version,
        "kind": model.kind,
        "feature_names": list(model.feature_names),
        "standardization": {"mean": list(model.mean), "std": list(model.std)},
        "parameters": model.parameters,
        "tau": model.tau,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path) -> AcceptanceModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model file is not JSON: {exc}") from exc
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format {payload.get('format_version')!r}"
        )
    try:
        names = tuple(payload["feature_names"])
        mean = tuple(float(v) for v in payload["standardization"]["mean"])
        std = tuple(float(v) for v in payload["standardization"]["std"])
        kind = payload["kind"]
        parameters = payload["parameters"]
        tau = float(payload["tau"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"model file missing fields: {exc}") from exc
    if len(mean) != len(names) or len(std) != len(names):
        raise ModelFormatError("standardization length does not match feature names")
    if kind == "logistic" and len(parameters.get("weights", ())) != len(names):
        raise ModelFormatError("weight vector length does not match feature names")
    if kind not in ("logistic", "tree_ensemble"):
        raise ModelFormatError(f"unknown model kind {kind!r}")
    if not 0.0 < tau < 1.0:
        raise ModelFormatError(f"tau must be in (0, 1), got {tau}")
    return AcceptanceModel(
        feature_names=names,
        mean=mean,
        std=std,
        kind=kind,
        parameters=parameters,
        tau=tau,
        version=payload["format_version"],
    )


def require_feature_contract(model: AcceptanceModel) -> None:
    """Refuse models whose feature order differs from this build's contract."""
    if tuple(model.feature_names) != FEATURE_NAMES:
        raise FeatureMismatch(
            "model feature order does not match the gate's feature contract"
        )
