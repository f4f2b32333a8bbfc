"""
Losses, splits, the gradient-descent training loop, metrics and gradient checking

Every gradient-trained model goes through `fit`: full-batch gradient descent (with the
learning rate halved whenever a step would increase the training loss) or mini-batch
descent, optional early stopping on a validation set, and evaluation on the test indices.
Direct estimators (the FLM) are fitted in closed form through the same entry point.
"""

import logging
import time
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from funcnet.core.errors import InvalidArgumentError, NumericFailureError
from funcnet.core.random import make_rng
from funcnet.core.simulate import CurveSet, ResponseKind
from funcnet.models.base import FunctionalModel, Parameters
from funcnet.schemas.config import LossKind, SplitConfig, TrainConfig
from funcnet.schemas.report import FitReport, Metrics

logger = logging.getLogger(__name__)

PROBABILITY_CLAMP = 1e-12
CLASSIFICATION_THRESHOLD = 0.5
MIN_LEARNING_RATE = 1e-12
STANDARDIZE_FLOOR = 1e-12


def loss_for(response_kind: ResponseKind) -> LossKind:
    if ResponseKind(response_kind) is ResponseKind.BINARY:
        return LossKind.BINARY_CROSS_ENTROPY
    return LossKind.SQUARED_ERROR


def loss_and_grad(kind: LossKind, yhat, y):
    """Per-sample loss and its derivative in yhat (scalars or matching arrays)"""
    yhat_arr = np.asarray(yhat, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if LossKind(kind) is LossKind.SQUARED_ERROR:
        diff = yhat_arr - y_arr
        loss, grad = diff ** 2, 2.0 * diff
    else:
        if not np.all(np.isin(y_arr, (0.0, 1.0))):
            raise InvalidArgumentError("cross-entropy needs responses in {0, 1}")
        p = np.clip(yhat_arr, PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
        loss = -(y_arr * np.log(p) + (1.0 - y_arr) * np.log(1.0 - p))
        grad = (p - y_arr) / (p * (1.0 - p))
    if loss.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


@dataclass(frozen=True)
class Split:
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray

    def validate(self, n: int) -> None:
        parts = [np.asarray(p, dtype=int) for p in (self.train_idx, self.val_idx, self.test_idx)]
        joined = np.concatenate(parts)
        if joined.size and (joined.min() < 0 or joined.max() >= n):
            raise InvalidArgumentError(f"split indices must lie in [0, {n})")
        if np.unique(joined).size != joined.size:
            raise InvalidArgumentError("train, validation and test indices must be disjoint")
        if parts[0].size == 0:
            raise InvalidArgumentError("the training set is empty")


def make_split(n: int, n_test: int, n_validation: int, seed) -> Split:
    """Random partition: n_test test samples, n_validation validation samples, the rest train"""
    if n_test < 0 or n_validation < 0 or n_test + n_validation >= n:
        raise InvalidArgumentError(
            f"cannot take {n_test} test and {n_validation} validation samples out of {n}"
        )
    order = make_rng(seed).permutation(n)
    test = np.sort(order[:n_test])
    val = np.sort(order[n_test:n_test + n_validation])
    train = np.sort(order[n_test + n_validation:])
    return Split(train, val, test)


def split_from_config(n: int, cfg: SplitConfig, use_validation: bool, seed) -> Split:
    n_test = int(round(n * cfg.test_fraction))
    n_validation = int(round((n - n_test) * cfg.validation_fraction)) if use_validation else 0
    return make_split(n, n_test, n_validation, seed)


def _objective(model: FunctionalModel, x: np.ndarray, y: np.ndarray, kind: LossKind) -> Tuple[float, Parameters]:
    """Mean loss over the batch and its gradients"""
    yhat, cache = model.forward(x)
    losses, dl = loss_and_grad(kind, yhat, y)
    return float(np.mean(losses)), model.backward(cache, dl / y.size)


def _mean_loss(model: FunctionalModel, x: np.ndarray, y: np.ndarray, kind: LossKind) -> float:
    losses, _ = loss_and_grad(kind, model.predict(x), y)
    return float(np.mean(losses))


def _standardize(model: FunctionalModel, x: np.ndarray) -> None:
    shift = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale < STANDARDIZE_FLOOR] = 1.0
    model.set_input_scaling(shift, scale)


def fit(
    model: FunctionalModel,
    data: CurveSet,
    split: Split,
    cfg: TrainConfig,
    label: Optional[str] = None,
) -> FitReport:
    """Train (or directly estimate) `model` on the split's training indices"""
    split.validate(len(data))
    model.input_grid.require_same(data.grid, "dataset grid")
    kind = cfg.loss or loss_for(data.response_kind)
    x_train, y_train = data.predictors[split.train_idx], data.responses[split.train_idx]
    x_val, y_val = data.predictors[split.val_idx], data.responses[split.val_idx]
    start = time.perf_counter()
    if cfg.standardize:
        _standardize(model, x_train)

    history = {"train": [], "val": [], "best_epoch": 0, "epochs": 0, "stopped_early": False, "lr": None}
    if not model.trainable_by_gradient:
        model.fit_direct(x_train, y_train)
    else:
        history = _descend(model, x_train, y_train, x_val, y_val, kind, cfg)

    report = FitReport(
        model=label or model.kind.upper(),
        kind=model.kind,
        parameter_count=model.parameter_count(),
        epochs_run=history["epochs"],
        best_epoch=history["best_epoch"],
        stopped_early=history["stopped_early"],
        final_lr=history["lr"],
        train_loss=history["train"],
        val_loss=history["val"],
        train_metrics=evaluate(model, data, split.train_idx),
        validation_metrics=evaluate(model, data, split.val_idx) if len(split.val_idx) else None,
        test_metrics=evaluate(model, data, split.test_idx) if len(split.test_idx) else None,
        train_idx=[int(i) for i in split.train_idx],
        val_idx=[int(i) for i in split.val_idx],
        test_idx=[int(i) for i in split.test_idx],
        wall_time=time.perf_counter() - start,
    )
    logger.info(
        f"Fitted {report.model}: {report.epochs_run} epochs, best epoch {report.best_epoch}, "
        f"train RMSE {report.train_metrics.rmse:.4f}"
    )
    return report


def _descend(model, x_train, y_train, x_val, y_val, kind: LossKind, cfg: TrainConfig) -> dict:
    monitor = cfg.early_stopping and cfg.max_epochs > 0
    if monitor and y_val.size == 0:
        raise InvalidArgumentError("early stopping needs a non-empty validation set")
    full_batch = cfg.batch_size is None or cfg.batch_size >= y_train.size
    rng = make_rng(cfg.seed)
    lr = cfg.lr

    loss, grads = _objective(model, x_train, y_train, kind)
    if not np.isfinite(loss):
        raise NumericFailureError("initial training loss is not finite", epoch=0)
    train_curve = [loss]
    val_curve = [_mean_loss(model, x_val, y_val, kind)] if y_val.size else []
    best_val = val_curve[0] if val_curve else np.inf
    best_epoch, best_params, waited = 0, model.snapshot(), 0
    stopped_early = False
    epoch = 0

    while epoch < cfg.max_epochs:
        epoch += 1
        if full_batch:
            accepted, loss, grads, lr = _full_batch_step(model, x_train, y_train, kind, grads, loss, lr, cfg, epoch)
            if not accepted:
                logger.info(f"Learning rate fell below {MIN_LEARNING_RATE:g} at epoch {epoch}; stopping")
                epoch -= 1
                break
        else:
            _mini_batch_epoch(model, x_train, y_train, kind, lr, cfg.batch_size, rng, epoch)
            loss = _mean_loss(model, x_train, y_train, kind)
            if not np.isfinite(loss):
                raise NumericFailureError("training loss is not finite", epoch=epoch)
        train_curve.append(loss)

        if y_val.size:
            val_loss = _mean_loss(model, x_val, y_val, kind)
            if not np.isfinite(val_loss):
                raise NumericFailureError("validation loss is not finite", epoch=epoch)
            val_curve.append(val_loss)
        logger.debug(f"Epoch {epoch}: train loss {loss:.6g}" + (f", validation loss {val_curve[-1]:.6g}" if y_val.size else ""))

        if monitor:
            if val_curve[-1] < best_val - cfg.min_delta:
                best_val, best_epoch, best_params, waited = val_curve[-1], epoch, model.snapshot(), 0
            else:
                waited += 1
                if waited >= cfg.patience:
                    stopped_early = True
                    logger.info(f"Early stopping at epoch {epoch}; restoring epoch {best_epoch}")
                    break

    if monitor:
        model.restore(best_params)
    else:
        best_epoch = epoch
    return {
        "train": train_curve,
        "val": val_curve,
        "best_epoch": best_epoch,
        "epochs": epoch,
        "stopped_early": stopped_early,
        "lr": lr,
    }


def _full_batch_step(model, x, y, kind, grads, loss, lr, cfg: TrainConfig, epoch: int):
    """One accepted descent step; halves lr while the step would increase the loss"""
    before = model.snapshot()
    while lr >= MIN_LEARNING_RATE:
        try:
            model.grad_step(grads, lr)
        except NumericFailureError as exc:
            raise NumericFailureError(exc.detail, epoch=epoch)
        new_loss, new_grads = _objective(model, x, y, kind)
        if np.isfinite(new_loss) and (not cfg.lr_halving or new_loss <= loss):
            return True, new_loss, new_grads, lr
        if not cfg.lr_halving:
            raise NumericFailureError("training loss is not finite", epoch=epoch)
        model.restore(before)
        lr /= 2.0
        logger.info(f"Loss increased at epoch {epoch}; halving learning rate to {lr:.3g}")
    return False, loss, grads, lr


def _mini_batch_epoch(model, x, y, kind, lr, batch_size, rng, epoch):
    order = rng.permutation(y.size)
    for start in range(0, y.size, batch_size):
        idx = order[start:start + batch_size]
        _, grads = _objective(model, x[idx], y[idx], kind)
        try:
            model.grad_step(grads, lr)
        except NumericFailureError as exc:
            raise NumericFailureError(exc.detail, epoch=epoch)


def evaluate(model: FunctionalModel, data: CurveSet, idx, response_kind: Optional[ResponseKind] = None) -> Metrics:
    """RMSE, and for binary responses the classification error and mean negative log-likelihood"""
    idx = np.asarray(idx, dtype=int)
    if idx.size == 0:
        raise InvalidArgumentError("cannot evaluate on an empty index set")
    return metrics_for(model.predict(data.predictors[idx]), data.responses[idx], response_kind or data.response_kind)


def metrics_for(yhat: np.ndarray, y: np.ndarray, response_kind: ResponseKind) -> Metrics:
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    metrics = Metrics(n=int(y.size), rmse=float(np.sqrt(np.mean((yhat - y) ** 2))))
    if ResponseKind(response_kind) is ResponseKind.BINARY:
        labels = (yhat >= CLASSIFICATION_THRESHOLD).astype(float)
        losses, _ = loss_and_grad(LossKind.BINARY_CROSS_ENTROPY, yhat, y)
        metrics.classification_error = float(np.mean(labels != y))
        metrics.mean_log_likelihood = float(np.mean(losses))
    return metrics


def gradient_check(
    model: FunctionalModel,
    x: np.ndarray,
    y: np.ndarray,
    kind: LossKind,
    eps: float = 1e-3,
    max_entries: Optional[int] = None,
    seed: int = 0,
    abs_floor: float = 1e-8,
) -> Dict[str, float]:
    """Worst error between analytic partials and central differences, per parameter array

    Analytic gradients are mapped to ordinary partials of the mean loss with the model's
    quadrature metric. Each entry is perturbed by eps divided by its metric factor, so a
    grid value moves the discretized function as much as a unit-metric coefficient, and
    the central difference is Richardson-extrapolated from steps h and h/2. The error is
    |a - f| / max(|a|, |f|), or |a - f| where the analytic partial is below abs_floor.
    """
    if not model.trainable_by_gradient:
        raise InvalidArgumentError(f"{model.kind} models have no gradient to check")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    _, grads = _objective(model, x, y, kind)
    analytic = model.euclidean_gradient(grads)
    metric = model.quadrature_metric()
    rng = make_rng(seed)
    worst = {}
    for name, param in model.parameters().items():
        flat = param.reshape(-1)
        steps = eps / np.broadcast_to(np.asarray(metric.get(name, 1.0), dtype=float), param.shape).reshape(-1)
        entries = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            entries = rng.choice(flat.size, size=max_entries, replace=False)
        a_flat = analytic[name].reshape(-1)
        errors = []
        for i in entries:
            numeric = _extrapolated_difference(model, x, y, kind, flat, i, steps[i])
            a = a_flat[i]
            if abs(a) < abs_floor:
                errors.append(abs(a - numeric))
            else:
                errors.append(abs(a - numeric) / max(abs(a), abs(numeric)))
        worst[name] = float(max(errors)) if errors else 0.0
    return worst


def _central_difference(model, x, y, kind, flat: np.ndarray, i: int, h: float) -> float:
    original = flat[i]
    flat[i] = original + h
    plus = _mean_loss(model, x, y, kind)
    flat[i] = original - h
    minus = _mean_loss(model, x, y, kind)
    flat[i] = original
    return (plus - minus) / (2.0 * h)


def _extrapolated_difference(model, x, y, kind, flat: np.ndarray, i: int, h: float) -> float:
    coarse = _central_difference(model, x, y, kind, flat, i, h)
    fine = _central_difference(model, x, y, kind, flat, i, h / 2.0)
    return (4.0 * fine - coarse) / 3.0
