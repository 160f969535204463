"""Analytic vs central finite-difference gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from propspan.granunet.model import (
    Example,
    GranuConfig,
    GranuParams,
    backward,
    forward,
    total_loss,
)

DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4
# gradients smaller than this are compared absolutely; FD noise is ~1e-11 at step 1e-5
RELATIVE_FLOOR = 1e-6


def numeric_gradient(
    example: Example,
    params: GranuParams,
    config: GranuConfig,
    positive_weight: float = 1.0,
    step: float = DEFAULT_STEP,
    names: tuple[str, ...] | None = None,
) -> GranuParams:
    grads = GranuParams.zeros_like(params)
    probe = params.copy()
    for name, value in probe.items():
        if names is not None and name not in names:
            continue
        out = getattr(grads, name)
        flat = value.reshape(-1)
        out_flat = out.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = total_loss(example, probe, config, positive_weight)
            flat[i] = orig - step
            down = total_loss(example, probe, config, positive_weight)
            flat[i] = orig
            out_flat[i] = (up - down) / (2.0 * step)
    return grads


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = RELATIVE_FLOOR) -> float:
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


@dataclass
class GradCheckReport:
    wiring: str
    gate_activation: str
    trials: int
    max_relative_error: float
    per_param: dict[str, float] = field(default_factory=dict)
    skipped_kinks: int = 0
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "wiring": self.wiring,
            "gate_activation": self.gate_activation,
            "trials": self.trials,
            "max_relative_error": self.max_relative_error,
            "per_param": dict(self.per_param),
            "skipped_kinks": self.skipped_kinks,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def random_example(rng: np.random.Generator, config: GranuConfig, max_len: int = 6) -> Example:
    n = int(rng.integers(1, max_len + 1))
    ids = rng.integers(0, config.vocab_size, n)
    labels = rng.integers(0, config.num_token_classes, n)
    return Example(ids.tolist(), labels.tolist(), bool(rng.integers(0, 2)))


def gradient_check(
    config: GranuConfig,
    trials: int = 10,
    step: float = DEFAULT_STEP,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int | None = None,
    spread: float = 0.5,
) -> GradCheckReport:
    """Compare gradients on ``trials`` random (params, example) draws.

    A relu-gated draw whose gate pre-activation lies within ``10 * step`` of
    zero straddles the kink, so finite differences are meaningless there; it
    is counted as skipped and redrawn.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    per_param: dict[str, float] = {}
    skipped = 0
    done = 0
    while done < trials:
        params = GranuParams.init(config, rng)
        # spread the weights so the check is not dominated by a near-linear regime
        for _, value in params.items():
            value += rng.normal(0.0, spread, value.shape)
        example = random_example(rng, config)
        pos_weight = float(rng.uniform(0.5, 3.0))
        trace = forward(example, params, config)
        if (
            config.wiring == "multigran"
            and config.gate_activation == "relu"
            and abs(trace.gate_pre) <= 10 * step
        ):
            skipped += 1
            if skipped > 100 * trials:
                raise RuntimeError("could not draw a relu gate away from its kink")
            continue
        analytic = backward(trace, example, params, config, pos_weight)
        numeric = numeric_gradient(example, params, config, pos_weight, step)
        for name, value in analytic.items():
            err = relative_error(value, getattr(numeric, name))
            per_param[name] = max(per_param.get(name, 0.0), err)
        done += 1
    return GradCheckReport(
        wiring=config.wiring,
        gate_activation=config.gate_activation,
        trials=trials,
        max_relative_error=max(per_param.values()),
        per_param=per_param,
        skipped_kinks=skipped,
        tolerance=tolerance,
    )
