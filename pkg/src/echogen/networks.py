"""Generator and patch-based conditional discriminator.

The generator is a plain encoder-decoder: 7 stride-2 convolutions down
to a tiny bottleneck, 7 stride-2 transposed convolutions back up, and a
final stride-1 convolution squashed into [0,1]. There are no skip
connections and no noise input, so in eval mode the forward pass is a
pure function of the condition.

The discriminator scores the realness of each stride-16 patch of the
(condition, image) channel concatenation: 4 stride-2 convolutions plus
a final stride-1 convolution emit one unbounded score per patch cell.
Every layer of both networks is batch-normalized and LeakyReLU-activated
except the final layer of each, which stays raw (sigmoid for the
generator output, linear scores for the discriminator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from .errors import InvalidConfigError, ShapeError

GENERATOR_STAGES = 7
CHANNEL_CAP_FACTOR = 8  # channel width saturates at base * 8 (64 -> 512)


@dataclass(frozen=True)
class ModelConfig:
    image_size: int = 256
    gen_base_channels: int = 64
    disc_base_channels: int = 64
    kernel_size: int = 4
    leaky_slope: float = 0.2
    patch_stride: int = 16
    condition_channels: int = 1
    image_channels: int = 1

    def __post_init__(self):
        downsample_factor = 2**GENERATOR_STAGES
        if self.image_size <= 0 or self.image_size % downsample_factor != 0:
            raise InvalidConfigError(
                f"image_size {self.image_size} must be a positive multiple of {downsample_factor}"
            )
        if self.patch_stride < 2 or 2 ** int(math.log2(self.patch_stride)) != self.patch_stride:
            raise InvalidConfigError(f"patch_stride {self.patch_stride} must be a power of two >= 2")
        if self.image_size % self.patch_stride != 0:
            raise InvalidConfigError(
                f"image_size {self.image_size} must be divisible by patch_stride {self.patch_stride}"
            )
        if self.kernel_size < 2 or self.kernel_size % 2 != 0:
            raise InvalidConfigError(f"kernel_size {self.kernel_size} must be even and >= 2")
        if self.gen_base_channels < 1 or self.disc_base_channels < 1:
            raise InvalidConfigError("base channel counts must be positive")

    @property
    def disc_grid_size(self) -> int:
        return self.image_size // self.patch_stride


def _stage_channels(base: int, stages: int) -> list[int]:
    return [min(base * 2**i, base * CHANNEL_CAP_FACTOR) for i in range(stages)]


class SamePadConv2d(nn.Module):
    """Stride-1 convolution with asymmetric same-padding for even kernels."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super().__init__()
        lo = kernel_size // 2 - 1
        hi = kernel_size // 2
        self.pad = (lo, hi, lo, hi)
        self.conv = nn.Conv2d(in_channels, out_channels, kernel_size, stride=1, padding=0)

    def forward(self, x):
        return self.conv(F.pad(x, self.pad))


def _down_block(cin: int, cout: int, k: int, slope: float, normalize: bool = True) -> list[nn.Module]:
    layers: list[nn.Module] = [nn.Conv2d(cin, cout, k, stride=2, padding=(k - 2) // 2)]
    if normalize:
        layers.append(nn.BatchNorm2d(cout))
    layers.append(nn.LeakyReLU(slope))
    return layers


def _up_block(cin: int, cout: int, k: int, slope: float) -> list[nn.Module]:
    return [
        nn.ConvTranspose2d(cin, cout, k, stride=2, padding=(k - 2) // 2),
        nn.BatchNorm2d(cout),
        nn.LeakyReLU(slope),
    ]


class Generator(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        k, slope = config.kernel_size, config.leaky_slope
        enc = _stage_channels(config.gen_base_channels, GENERATOR_STAGES)
        layers: list[nn.Module] = []
        cin = config.condition_channels
        for cout in enc:
            layers += _down_block(cin, cout, k, slope)
            cin = cout
        # Decoder mirrors the encoder widths; the last upsample lands on
        # the base width before the final stride-1 projection.
        for cout in list(reversed(enc[:-1])) + [config.gen_base_channels]:
            layers += _up_block(cin, cout, k, slope)
            cin = cout
        layers += [SamePadConv2d(cin, config.image_channels, k), nn.Sigmoid()]
        self.net = nn.Sequential(*layers)

    def forward(self, condition: torch.Tensor) -> torch.Tensor:
        _check_spatial(condition, self.config, channels=self.config.condition_channels, name="condition")
        return self.net(condition)


class Discriminator(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        k, slope = config.kernel_size, config.leaky_slope
        n_down = int(math.log2(config.patch_stride))
        widths = _stage_channels(config.disc_base_channels, n_down)
        layers: list[nn.Module] = []
        cin = config.condition_channels + config.image_channels
        for cout in widths:
            layers += _down_block(cin, cout, k, slope)
            cin = cout
        # Raw per-patch scores: no normalization, no activation.
        layers.append(SamePadConv2d(cin, 1, k))
        self.net = nn.Sequential(*layers)

    def forward(self, pair: torch.Tensor) -> torch.Tensor:
        expected = self.config.condition_channels + self.config.image_channels
        _check_spatial(pair, self.config, channels=expected, name="condition+image")
        return self.net(pair)


def _check_spatial(x: torch.Tensor, config: ModelConfig, channels: int, name: str) -> None:
    if x.ndim != 4 or x.shape[1] != channels or x.shape[2] != config.image_size or x.shape[3] != config.image_size:
        raise ShapeError(
            f"{name} batch must have shape (B, {channels}, {config.image_size}, {config.image_size}), "
            f"got {tuple(x.shape)}"
        )


def _init_parameters(module: nn.Module, seed: int) -> None:
    """DCGAN-style init: conv weights N(0, 0.02), norm weights N(1, 0.02)."""
    rng = torch.Generator().manual_seed(seed)
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.normal_(m.weight, 0.0, 0.02, generator=rng)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.BatchNorm2d):
            nn.init.normal_(m.weight, 1.0, 0.02, generator=rng)
            nn.init.zeros_(m.bias)


def build_generator(config: ModelConfig, seed: int) -> Generator:
    g = Generator(config)
    _init_parameters(g, seed)
    return g


def build_discriminator(config: ModelConfig, seed: int) -> Discriminator:
    d = Discriminator(config)
    _init_parameters(d, seed)
    return d


def generate(g: Generator, condition: torch.Tensor, mode: str = "eval") -> torch.Tensor:
    """Run the generator on a condition batch (B, 1, H, W) -> (B, 1, H, W).

    Eval mode uses the accumulated normalization statistics and is
    bitwise deterministic; train mode uses batch statistics.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    if mode == "eval":
        g.eval()
        with torch.no_grad():
            return g(condition)
    g.train()
    return g(condition)


def discriminate(d: Discriminator, condition: torch.Tensor, image: torch.Tensor) -> torch.Tensor:
    """Raw patch score grid for (condition, image); condition channels first."""
    if condition.shape[0] != image.shape[0] or condition.shape[2:] != image.shape[2:]:
        raise ShapeError(f"condition {tuple(condition.shape)} and image {tuple(image.shape)} are misaligned")
    return d(torch.cat([condition, image], dim=1))


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def architecture_summary(config: ModelConfig) -> str:
    """Layer table with output shapes and parameter counts for both networks."""
    lines = []
    for title, net in (("generator", build_generator(config, 0)), ("discriminator", build_discriminator(config, 0))):
        channels = config.condition_channels if title == "generator" else (
            config.condition_channels + config.image_channels
        )
        x = torch.zeros(1, channels, config.image_size, config.image_size)
        lines.append(f"{title} (input {tuple(x.shape)})")
        net.eval()
        with torch.no_grad():
            for i, layer in enumerate(net.net):
                x = layer(x)
                n_params = parameter_count(layer)
                lines.append(f"  {i:2d}  {layer.__class__.__name__:<16} out={tuple(x.shape)}  params={n_params}")
        lines.append(f"  total parameters: {parameter_count(net)}")
    return "\n".join(lines)
