import numpy as np
import pytest

from glioseg import (
    TrainingConfig,
    baseline_config,
    build_schedule,
    detect_phases,
    extended_config,
    poly_lr_at,
)
from glioseg.schedules import moving_average


def test_config_validation():
    with pytest.raises(ValueError):
        TrainingConfig(total_epochs=0)
    with pytest.raises(ValueError):
        TrainingConfig(total_epochs=10, poly_exponent=0.0)
    with pytest.raises(ValueError):
        TrainingConfig(total_epochs=10, lr_floor=0.02)


def test_poly_lr_endpoints():
    cfg = baseline_config()
    assert poly_lr_at(0, cfg) == 0.01
    assert poly_lr_at(200, cfg) == 0.0
    with pytest.raises(ValueError):
        poly_lr_at(201, cfg)
    with pytest.raises(ValueError):
        poly_lr_at(-1, cfg)


def test_poly_lr_midpoint():
    cfg = baseline_config()
    assert poly_lr_at(100, cfg) == pytest.approx(0.01 * 0.5**0.9, rel=1e-12)
    assert poly_lr_at(100, cfg) == pytest.approx(5.35887e-3, rel=1e-5)


def test_poly_lr_monotone_nonincreasing():
    for cfg in (baseline_config(), extended_config(), TrainingConfig(total_epochs=37, lr_floor=1e-3)):
        lrs = [poly_lr_at(e, cfg) for e in range(cfg.total_epochs + 1)]
        assert all(a >= b for a, b in zip(lrs, lrs[1:]))


def test_build_schedule_baseline():
    schedule = build_schedule(baseline_config())
    assert len(schedule) == 200
    assert schedule[0] == (0, 0.01)
    lrs = [lr for _, lr in schedule]
    assert all(a > b for a, b in zip(lrs, lrs[1:]))
    assert lrs[-1] == pytest.approx(0.01 * (1 / 200) ** 0.9, rel=1e-12)


def test_build_schedule_extended_floor():
    cfg = extended_config()
    schedule = build_schedule(cfg)
    assert len(schedule) == 3500
    assert schedule[0][1] == 0.01
    lrs = np.array([lr for _, lr in schedule])
    assert lrs.min() == 1e-4
    raw_final = 0.01 * (1 / 3500) ** 0.9
    assert raw_final < 1e-4  # the floor actually clips
    assert raw_final == pytest.approx(6.45e-6, rel=0.01)


def test_build_schedule_matches_pointwise():
    cfg = TrainingConfig(total_epochs=57, lr0=0.02, poly_exponent=1.3, lr_floor=1e-3)
    for e, lr in build_schedule(cfg):
        assert lr == poly_lr_at(e, cfg)
        assert lr <= cfg.lr0


def test_moving_average_preserves_constants():
    assert np.allclose(moving_average(np.full(30, 4.2), 11), 4.2)
    with pytest.raises(ValueError):
        moving_average(np.zeros(30), 4)


# --- phase detection -------------------------------------------------------


def synthetic_curves(rng, n=1400, fit_at=100, grok_at=1001, plateau=0.60, jump_to=0.90, noise=0.002):
    epochs = np.arange(n)
    train = np.exp(-epochs / (fit_at / np.log(5.0)))  # hits 0.2x initial at fit_at
    val = np.where(
        epochs < fit_at,
        plateau * epochs / fit_at,
        np.where(epochs < grok_at, plateau, jump_to),
    ).astype(float)
    if noise:
        val = val + rng.normal(0, noise, size=n)
    return epochs, train, val


def test_detect_phases_planted_change_points(rng):
    window = 11
    epochs, train, val = synthetic_curves(rng)
    phases = detect_phases(train, val, epochs=epochs, window=window)
    assert phases.fit_epoch is not None and abs(phases.fit_epoch - 100) <= window
    assert phases.overfit_epoch is not None and 100 - window <= phases.overfit_epoch <= 1000
    assert phases.grok_epoch is not None and abs(phases.grok_epoch - 1001) <= window
    assert phases.fit_epoch <= phases.overfit_epoch < phases.grok_epoch


def test_detect_phases_monotone_val_has_no_grok(rng):
    n = 400
    train = np.exp(-np.arange(n) / 40.0)
    val = 0.2 + 0.002 * np.arange(n)  # steadily improving, no plateau
    phases = detect_phases(train, val)
    assert phases.grok_epoch is None


def test_detect_phases_constant_val(rng):
    n = 400
    train = np.exp(-np.arange(n) / 40.0)
    val = np.full(n, 0.7)
    phases = detect_phases(train, val)
    assert phases.grok_epoch is None
    assert phases.overfit_epoch == phases.fit_epoch


def test_detect_phases_no_fit_when_loss_stays_high():
    n = 100
    train = np.linspace(1.0, 0.9, n)
    val = np.full(n, 0.5)
    phases = detect_phases(train, val)
    assert phases.fit_epoch is None and phases.overfit_epoch is None and phases.grok_epoch is None


def test_detect_phases_scale_invariance(rng):
    epochs, train, val = synthetic_curves(rng)
    base = detect_phases(train, val, epochs=epochs)
    scaled = detect_phases(train * 37.5, val + 0.11, epochs=epochs)
    assert (base.fit_epoch, base.overfit_epoch, base.grok_epoch) == (
        scaled.fit_epoch,
        scaled.overfit_epoch,
        scaled.grok_epoch,
    )


def test_detect_phases_input_validation():
    with pytest.raises(ValueError):
        detect_phases(np.zeros(10), np.zeros(10))  # too short
    with pytest.raises(ValueError):
        detect_phases(np.zeros(30), np.zeros(29))
