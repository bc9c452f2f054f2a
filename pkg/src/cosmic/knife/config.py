"""Configuration for the mixture entropy estimators."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import OutOfRange


@dataclass(frozen=True)
class KnifeConfig:
    """Hyperparameters shared by the marginal and conditional fitters.

    modes is the mixture size K.  holdout_fraction=0 fits and evaluates on
    the full dataset; a positive fraction carves out an evaluation split.
    sigma_floor/sigma_ceil clamp every mixture scale after each optimizer
    step, which keeps densities bounded on degenerate data.
    """

    modes: int = 4
    covariance: str = "diagonal"
    learn_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 128
    patience: int = 10
    holdout_fraction: float = 0.0
    standardize: bool = True
    hidden_width: int = 64
    sigma_floor: float = 1e-4
    sigma_ceil: float = 1e4
    seed: int = 0

    def __post_init__(self):
        if self.modes < 1:
            raise OutOfRange(f"modes must be >= 1, got {self.modes}")
        if self.covariance != "diagonal":
            raise OutOfRange(f"covariance must be 'diagonal', got {self.covariance!r}")
        if not self.learn_rate > 0:
            raise OutOfRange(f"learn_rate must be > 0, got {self.learn_rate}")
        if self.epochs < 1:
            raise OutOfRange(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise OutOfRange(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise OutOfRange(f"patience must be >= 1, got {self.patience}")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise OutOfRange(
                f"holdout_fraction must be in [0,1), got {self.holdout_fraction}"
            )
        if self.hidden_width < 1:
            raise OutOfRange(f"hidden_width must be >= 1, got {self.hidden_width}")
        if not 0 < self.sigma_floor < self.sigma_ceil:
            raise OutOfRange(
                f"need 0 < sigma_floor < sigma_ceil, got {self.sigma_floor}, {self.sigma_ceil}"
            )
