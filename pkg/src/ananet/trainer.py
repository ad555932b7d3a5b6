"""Adam training loop, evaluation metrics, grid sweep, and ablations."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .fusion import N_CLASSES
from .model import VARIANTS, Model

SHUFFLE_STREAM = 101  # spawn key for the shuffle rng, so data seeds stay separate


@dataclass
class OptimizerState:
    """Adam accumulators keyed by parameter name."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def init_optimizer(params, lr: float = 0.001) -> OptimizerState:
    state = OptimizerState(lr=lr)
    for name, p in params:
        state.m[name] = np.zeros_like(p.data)
        state.v[name] = np.zeros_like(p.data)
    return state


def adam_step(params, state: OptimizerState) -> None:
    """One Adam update with bias correction, reading grads off the tensors."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    scale = state.lr * np.sqrt(1.0 - b2 ** state.t) / (1.0 - b1 ** state.t)
    for name, p in params:
        if p.grad is None:
            raise ValueError(f"parameter {name} has no gradient; call backward first")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * p.grad
        v *= b2
        v += (1.0 - b2) * p.grad * p.grad
        p.data -= scale * m / (np.sqrt(v) + state.eps)


# ------------------------------------------------------------------- metrics

@dataclass
class MetricsReport:
    accuracy: float
    weighted_f1: float
    per_class_f1: tuple  # indexed by label
    confusion: np.ndarray  # (3, 3), rows = true label, cols = predicted

    @property
    def f_irr(self) -> float:
        return self.per_class_f1[0]

    @property
    def f_imr(self) -> float:
        return self.per_class_f1[1]

    @property
    def f_exr(self) -> float:
        return self.per_class_f1[2]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "weighted_f1": self.weighted_f1,
            "f_irr": self.f_irr,
            "f_imr": self.f_imr,
            "f_exr": self.f_exr,
            "confusion": self.confusion.tolist(),
        }


def metrics_from_confusion(confusion: np.ndarray) -> MetricsReport:
    confusion = np.asarray(confusion, dtype=np.int64)
    total = int(confusion.sum())
    if total == 0:
        raise ValueError("empty confusion matrix")
    accuracy = float(np.trace(confusion)) / total
    f1s = []
    weighted = 0.0
    for c in range(N_CLASSES):
        tp = float(confusion[c, c])
        fp = float(confusion[:, c].sum()) - tp
        fn = float(confusion[c, :].sum()) - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        f1s.append(f1)
        weighted += (confusion[c, :].sum() / total) * f1
    return MetricsReport(accuracy=accuracy, weighted_f1=float(weighted),
                         per_class_f1=tuple(f1s), confusion=confusion)


def evaluate(model: Model, records) -> MetricsReport:
    if not records:
        raise ValueError("cannot evaluate on an empty dataset")
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for record in records:
        pred = model.predict(record)
        confusion[record.label, pred.predicted] += 1
    return metrics_from_confusion(confusion)


def majority_baseline(train_records, eval_records) -> MetricsReport:
    """Predict the most frequent training label for every pair."""
    counts = np.zeros(N_CLASSES, dtype=np.int64)
    for record in train_records:
        counts[record.label] += 1
    winner = int(np.argmax(counts))
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for record in eval_records:
        confusion[record.label, winner] += 1
    return metrics_from_confusion(confusion)


def random_baseline(eval_records, seed: int = 0) -> MetricsReport:
    rng = np.random.default_rng(seed)
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for record in eval_records:
        confusion[record.label, rng.integers(N_CLASSES)] += 1
    return metrics_from_confusion(confusion)


# ------------------------------------------------------------------ training

@dataclass
class TrainResult:
    model: Model
    history: list  # per-epoch dicts: epoch, L, L_c, L_i, L_o, dev_acc, dev_wf1
    best_epoch: int
    best_dev_accuracy: float


LOG_COLUMNS = ("epoch", "L", "L_c", "L_i", "L_o", "dev_acc", "dev_wf1")


def write_train_log(history, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(LOG_COLUMNS)
        for row in history:
            writer.writerow([row[c] for c in LOG_COLUMNS])


def train(model: Model, train_records, dev_records,
          epochs: int | None = None, log_path=None, progress=None) -> TrainResult:
    """Shuffled mini-batch Adam; keeps the best dev-accuracy parameters.

    The shuffle rng is seeded from the run seed so repeated runs see the
    same batch order. Remainder batches are kept. After the last epoch the
    model is rolled back to its best dev-accuracy snapshot.
    """
    if not train_records:
        raise ValueError("cannot train on an empty dataset")
    if not dev_records:
        raise ValueError("need a dev split to select the best epoch")
    cfg = model.config
    if epochs is None:
        epochs = cfg.epochs
    params = model.parameters()
    state = init_optimizer(params, lr=cfg.lr)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, SHUFFLE_STREAM]))

    history = []
    best_epoch = -1
    best_acc = -1.0
    best_snapshot = None
    n = len(train_records)
    for epoch in range(epochs):
        order = rng.permutation(n)
        sums = {"L": 0.0, "L_c": 0.0, "L_i": 0.0, "L_o": 0.0}
        n_batches = 0
        for lo in range(0, n, cfg.batch):
            batch = [train_records[i] for i in order[lo:lo + cfg.batch]]
            model.zero_grad()
            loss, comps = model.batch_loss(batch)
            if cfg.lr > 0:
                loss.backward()
                adam_step(params, state)
            for key in sums:
                sums[key] += comps[key]
            n_batches += 1
        dev = evaluate(model, dev_records)
        row = {"epoch": epoch, "dev_acc": dev.accuracy, "dev_wf1": dev.weighted_f1}
        for key in sums:
            row[key] = sums[key] / n_batches
        history.append(row)
        if dev.accuracy > best_acc:
            best_acc = dev.accuracy
            best_epoch = epoch
            best_snapshot = [p.data.copy() for _, p in params]
        if progress is not None:
            progress(row)

    for (_, p), saved in zip(params, best_snapshot):
        p.data[...] = saved
    if log_path is not None:
        write_train_log(history, log_path)
    return TrainResult(model=model, history=history,
                       best_epoch=best_epoch, best_dev_accuracy=best_acc)


# ------------------------------------------------------- sweep and ablations

def sweep(config, train_records, dev_records, lam_grid, eta_grid,
          epochs: int | None = None):
    """Grid search over the stream weights; one fresh seeded run per cell.

    Returns rows of (lambda, eta, dev_accuracy) in grid order.
    """
    if not lam_grid or not eta_grid:
        raise ValueError("lambda and eta grids must be nonempty")
    rows = []
    for lam in lam_grid:
        for eta in eta_grid:
            cell_cfg = replace(config, lam=float(lam), eta=float(eta))
            model = Model(cell_cfg)
            result = train(model, train_records, dev_records, epochs=epochs)
            rows.append((float(lam), float(eta), result.best_dev_accuracy))
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("lambda", "eta", "dev_acc"))
        writer.writerows(rows)


def ablate(config, train_records, dev_records, test_records,
           variants=VARIANTS, epochs: int | None = None) -> dict:
    """Train each structural variant independently and report test metrics."""
    for variant in variants:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    reports = {}
    for variant in variants:
        model = Model(config, variant=variant)
        train(model, train_records, dev_records, epochs=epochs)
        reports[variant] = evaluate(model, test_records)
    return reports
