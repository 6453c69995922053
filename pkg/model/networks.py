"""
ResNet-9 style encoder, decoder and discriminator for magnitude spectrograms.

Layout for ``block_count=B``: a 3x3 input convolution, then B residual
blocks of two 3x3 convolutions each (2B+1 weighted conv layers). Block 0
keeps the resolution; later blocks halve it with stride 2. The decoder
mirrors the trunk and upsamples back to the sizes recorded on the way down.
"""
import math
from typing import Literal

import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field, model_validator
from torch import nn

PROB_EPS = 1e-7


class NetworkSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    input_shape: tuple[int, int] | None = None  # (freq_bins, frames), filled in from the data
    latent_dim: int = Field(default=128, gt=0)
    channel_schedule: tuple[int, ...] = (16, 32, 64, 64)
    block_count: int = Field(default=4, ge=1)
    nonlinearity: Literal["relu", "leaky_relu", "elu", "tanh"] = "relu"
    discriminator_head: bool = True

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.channel_schedule) != self.block_count:
            raise ValueError(
                f"channel_schedule has {len(self.channel_schedule)} entries for {self.block_count} blocks"
            )
        if any(c < 1 for c in self.channel_schedule):
            raise ValueError("channel counts must be positive")
        if self.input_shape is not None:
            if any(d < 1 for d in self.input_shape):
                raise ValueError(f"invalid input_shape {self.input_shape}")
            size = math.prod(self.input_shape)
            if self.latent_dim >= size:
                raise ValueError(f"latent_dim {self.latent_dim} must be below the input size {size}")
        return self

    def with_input_shape(self, shape: tuple[int, int]) -> "NetworkSpec":
        return NetworkSpec(**{**self.model_dump(), "input_shape": tuple(shape)})

    def stage_sizes(self) -> list[tuple[int, int]]:
        """Spatial size after each residual block of the trunk."""
        h, w = self.input_shape
        sizes = [(h, w)]
        for _ in range(1, self.block_count):
            h, w = (h + 1) // 2, (w + 1) // 2
            sizes.append((h, w))
        return sizes


def activation(name: str) -> nn.Module:
    return {
        "relu": nn.ReLU,
        "leaky_relu": lambda: nn.LeakyReLU(0.2),
        "elu": nn.ELU,
        "tanh": nn.Tanh,
    }[name]()


class ResidualBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int, nonlinearity: str):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.shortcut = (
            nn.Conv2d(in_ch, out_ch, 1, stride=stride) if stride != 1 or in_ch != out_ch else nn.Identity()
        )
        self.act = activation(nonlinearity)

    def forward(self, x):
        out = self.act(self.conv1(x))
        out = self.conv2(out)
        return self.act(out + self.shortcut(x))


class Trunk(nn.Module):
    """Input convolution followed by the residual stages."""

    def __init__(self, spec: NetworkSpec):
        super().__init__()
        schedule = spec.channel_schedule
        self.stem = nn.Conv2d(1, schedule[0], 3, padding=1)
        self.act = activation(spec.nonlinearity)
        blocks = []
        for b, channels in enumerate(schedule):
            in_ch = schedule[0] if b == 0 else schedule[b - 1]
            blocks.append(ResidualBlock(in_ch, channels, 1 if b == 0 else 2, spec.nonlinearity))
        self.blocks = nn.Sequential(*blocks)
        h, w = spec.stage_sizes()[-1]
        self.out_features = schedule[-1] * h * w

    def forward(self, x):
        return self.blocks(self.act(self.stem(x))).flatten(1)


class Encoder(nn.Module):
    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.trunk = Trunk(spec)
        self.head = nn.Linear(self.trunk.out_features, spec.latent_dim)

    def forward(self, x):
        return self.head(self.trunk(x))


class Decoder(nn.Module):
    def __init__(self, spec: NetworkSpec):
        super().__init__()
        schedule = spec.channel_schedule
        self.sizes = spec.stage_sizes()
        h, w = self.sizes[-1]
        self.head = nn.Linear(spec.latent_dim, schedule[-1] * h * w)
        self.act = activation(spec.nonlinearity)
        stages = []
        for b in reversed(range(1, spec.block_count)):
            stages.append(nn.Upsample(size=self.sizes[b - 1], mode="nearest"))
            stages.append(ResidualBlock(schedule[b], schedule[b - 1], 1, spec.nonlinearity))
        stages.append(ResidualBlock(schedule[0], schedule[0], 1, spec.nonlinearity))
        self.blocks = nn.Sequential(*stages)
        self.out = nn.Conv2d(schedule[0], 1, 3, padding=1)
        self._top = (schedule[-1], h, w)

    def forward(self, h):
        x = self.act(self.head(h)).view(h.shape[0], *self._top)
        return F.softplus(self.out(self.blocks(x)))


class Discriminator(nn.Module):
    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.trunk = Trunk(spec)
        self.head = nn.Linear(self.trunk.out_features, 1)

    def forward(self, x):
        p = torch.sigmoid(self.head(self.trunk(x))).squeeze(1)
        return p.clamp(PROB_EPS, 1 - PROB_EPS)


def init_weights(module: nn.Module, nonlinearity: str, generator: torch.Generator, head_gain: float = 1.0) -> None:
    """Fan-in scaled normal weights, zero biases. ``head`` layers use gain/sqrt(fan_in)."""
    kaiming = {"relu": ("relu", 0.0), "leaky_relu": ("leaky_relu", 0.2), "elu": ("relu", 0.0), "tanh": ("tanh", 0.0)}
    mode, slope = kaiming[nonlinearity]
    for name, sub in module.named_modules():
        if not isinstance(sub, (nn.Conv2d, nn.Linear)):
            continue
        if name == "head":
            nn.init.normal_(sub.weight, 0.0, head_gain / math.sqrt(sub.weight.shape[1]), generator=generator)
        else:
            nn.init.kaiming_normal_(sub.weight, a=slope, mode="fan_in", nonlinearity=mode, generator=generator)
        nn.init.zeros_(sub.bias)
