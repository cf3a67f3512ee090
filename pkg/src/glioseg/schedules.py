"""Polynomial LR schedules for the baseline and extended training regimes,
plus fit/overfit/grok phase detection on logged training curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainingConfig:
    """Schedule parameters. momentum/weight_decay/patch_size/iterations_per_epoch
    are carried as run metadata only; no computation here consumes them."""

    total_epochs: int
    lr0: float = 0.01
    poly_exponent: float = 0.9
    lr_floor: float = 0.0
    momentum: float = 0.99
    weight_decay: float = 3e-5
    patch_size: tuple[int, int, int] = (128, 160, 112)
    iterations_per_epoch: int = 300

    def __post_init__(self):
        if self.total_epochs < 1:
            raise ValueError(f"total_epochs must be >= 1, got {self.total_epochs}")
        if self.poly_exponent <= 0:
            raise ValueError(f"poly_exponent must be > 0, got {self.poly_exponent}")
        if not 0 <= self.lr_floor < self.lr0:
            raise ValueError(f"need 0 <= lr_floor < lr0, got floor={self.lr_floor} lr0={self.lr0}")


def baseline_config(total_epochs: int = 200) -> TrainingConfig:
    """Budget run: decays all the way to zero."""
    return TrainingConfig(total_epochs=total_epochs, lr_floor=0.0)


def extended_config(total_epochs: int = 3500) -> TrainingConfig:
    """Long run: fresh decay from lr0, clipped at a 1e-4 floor."""
    return TrainingConfig(total_epochs=total_epochs, lr_floor=1e-4)


def poly_lr_at(epoch: int, cfg: TrainingConfig) -> float:
    """max(floor, lr0 * (1 - epoch/total)^exponent)."""
    if not 0 <= epoch <= cfg.total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {cfg.total_epochs}]")
    return max(cfg.lr_floor, cfg.lr0 * (1.0 - epoch / cfg.total_epochs) ** cfg.poly_exponent)


def build_schedule(cfg: TrainingConfig) -> list[tuple[int, float]]:
    """(epoch, lr) for every training epoch 0..total_epochs-1."""
    return [(e, poly_lr_at(e, cfg)) for e in range(cfg.total_epochs)]


@dataclass(frozen=True)
class CurvePhases:
    """Detected training phases; any may be absent. Epoch fields are the
    epoch numbers of the input series; *_value is the smoothed series value
    at detection (train loss for fit, val score otherwise)."""

    fit_epoch: int | None = None
    fit_value: float | None = None
    overfit_epoch: int | None = None
    overfit_value: float | None = None
    grok_epoch: int | None = None
    grok_value: float | None = None


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window shrinks symmetrically at the edges."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    values = np.asarray(values, dtype=np.float64)
    half = window // 2
    csum = np.concatenate(([0.0], np.cumsum(values)))
    n = len(values)
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, n - 1)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def detect_phases(
    train_loss,
    val_score,
    epochs=None,
    window: int = 11,
    fit_fraction: float = 0.2,
    grok_delta: float = 0.05,
    min_plateau_len: int | None = None,
) -> CurvePhases:
    """Locate the fit / overfit-plateau / grok phases of a training run.

    Both series are smoothed with a centered moving average. Fit is the first
    epoch where smoothed train loss drops to fit_fraction of its initial
    value. The overfit epoch opens the longest run (at least min_plateau_len
    epochs, default 2*window) over which smoothed val score never rises more
    than grok_delta/2 above the run's starting value while smoothed train
    loss keeps decreasing. Grok is the first later epoch where smoothed val
    score exceeds that plateau value by at least grok_delta.
    """
    train = np.asarray(train_loss, dtype=np.float64)
    val = np.asarray(val_score, dtype=np.float64)
    if train.shape != val.shape or train.ndim != 1:
        raise ValueError(f"series must be 1D and aligned, got {train.shape} and {val.shape}")
    n = len(train)
    if n < 2 * window:
        raise ValueError(f"need at least {2 * window} epochs, got {n}")
    if epochs is None:
        epochs = np.arange(n)
    else:
        epochs = np.asarray(epochs)
        if epochs.shape != train.shape:
            raise ValueError("epochs must align with the series")
    if min_plateau_len is None:
        min_plateau_len = 2 * window

    s_train = moving_average(train, window)
    s_val = moving_average(val, window)

    fit_hits = np.nonzero(s_train <= fit_fraction * s_train[0])[0]
    if len(fit_hits) == 0:
        return CurvePhases()
    fit_idx = int(fit_hits[0])

    # nonincreasing train loss, with slack proportional to the loss range
    decrease_tol = 1e-9 * (float(s_train.max() - s_train.min()) + 1e-30)

    runs: list[tuple[int, int]] = []  # [start, end)
    i = fit_idx
    while i < n:
        base = s_val[i]
        j = i + 1
        while j < n and s_val[j] <= base + grok_delta / 2 and s_train[j] <= s_train[j - 1] + decrease_tol:
            j += 1
        runs.append((i, j))
        i = max(j, i + 1)

    plateau = max(runs, key=lambda r: r[1] - r[0])
    if plateau[1] - plateau[0] < min_plateau_len:
        return CurvePhases(fit_epoch=int(epochs[fit_idx]), fit_value=float(s_train[fit_idx]))

    ov_idx = plateau[0]
    plateau_val = s_val[ov_idx]
    grok_hits = np.nonzero(s_val[ov_idx + 1 :] >= plateau_val + grok_delta)[0]
    phases = CurvePhases(
        fit_epoch=int(epochs[fit_idx]),
        fit_value=float(s_train[fit_idx]),
        overfit_epoch=int(epochs[ov_idx]),
        overfit_value=float(plateau_val),
    )
    if len(grok_hits):
        g_idx = ov_idx + 1 + int(grok_hits[0])
        phases = CurvePhases(
            fit_epoch=phases.fit_epoch,
            fit_value=phases.fit_value,
            overfit_epoch=phases.overfit_epoch,
            overfit_value=phases.overfit_value,
            grok_epoch=int(epochs[g_idx]),
            grok_value=float(s_val[g_idx]),
        )
    return phases
