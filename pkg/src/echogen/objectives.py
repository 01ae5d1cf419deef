"""Adversarial and reconstruction criteria.

The adversarial term is least-squares, not cross-entropy: the
discriminator is pushed toward score 1 on real patches and 0 on fake
ones, and the generator pushes its outputs' patch scores toward 1. All
reductions are means over batch and patch grid. The generator total is
``adv_weight * adversarial + reconstruction`` with the reconstruction
term being pixel-wise mean absolute error.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .errors import EmptyInputError, InvalidConfigError, ShapeError

DEFAULT_ADV_WEIGHT = 0.01

REAL_TARGET = 1.0
FAKE_TARGET = 0.0


def d_loss(real_scores: torch.Tensor, fake_scores: torch.Tensor) -> torch.Tensor:
    """Discriminator objective: mean (1 - real)^2 + mean fake^2."""
    if real_scores.shape != fake_scores.shape:
        raise ShapeError(f"score grids differ: {tuple(real_scores.shape)} vs {tuple(fake_scores.shape)}")
    if real_scores.numel() == 0:
        raise EmptyInputError("empty score grids")
    return ((REAL_TARGET - real_scores) ** 2).mean() + ((fake_scores - FAKE_TARGET) ** 2).mean()


def g_adv_loss(fake_scores: torch.Tensor) -> torch.Tensor:
    """Generator adversarial objective: mean (1 - fake)^2."""
    if fake_scores.numel() == 0:
        raise EmptyInputError("empty score grid")
    return ((REAL_TARGET - fake_scores) ** 2).mean()


def recon_loss(target: torch.Tensor, generated: torch.Tensor) -> torch.Tensor:
    """Pixel-wise mean absolute error."""
    if target.shape != generated.shape:
        raise ShapeError(f"target {tuple(target.shape)} vs generated {tuple(generated.shape)}")
    if target.numel() == 0:
        raise EmptyInputError("empty image batches")
    return (target - generated).abs().mean()


def g_total_loss(adv, recon, adv_weight: float = DEFAULT_ADV_WEIGHT):
    """Weighted generator objective: adv_weight * adv + recon."""
    if adv_weight < 0:
        raise InvalidConfigError(f"adversarial weight must be >= 0, got {adv_weight}")
    return adv_weight * adv + recon


@dataclass(frozen=True)
class LossReport:
    """One training step's loss components."""

    d_loss: float
    g_adv: float
    g_recon: float
    g_total: float
    adv_weight: float = DEFAULT_ADV_WEIGHT

    CSV_HEADER = "iteration,d_loss,g_adv,g_recon,g_total"

    def __post_init__(self):
        if min(self.d_loss, self.g_adv, self.g_recon, self.g_total) < 0:
            raise ValueError(f"loss components must be >= 0: {self}")
        expected = self.adv_weight * self.g_adv + self.g_recon
        if abs(self.g_total - expected) > 1e-6:
            raise ValueError(f"g_total {self.g_total} != adv_weight*g_adv + g_recon = {expected}")

    def csv_row(self, iteration: int) -> str:
        return f"{iteration},{self.d_loss:.10g},{self.g_adv:.10g},{self.g_recon:.10g},{self.g_total:.10g}"
