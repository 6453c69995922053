"""
K autoencoders with one discriminator each, the unit the trainer updates.
"""
import logging
import math
from enum import Enum

import numpy as np
import torch
from pydantic import ValidationError
from torch import nn

import config
from errors import ArgumentError, ConfigurationError
from losses.weights import LossWeights
from model.networks import Decoder, Discriminator, Encoder, NetworkSpec, init_weights

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    BASELINE = "baseline"
    CASS = "cass"
    CASS_CROSS = "cass_cross"


class ComponentModel(nn.Module):
    """EN_i, DE_i and D_i for one component."""

    def __init__(self, spec: NetworkSpec):
        super().__init__()
        self.spec = spec
        self.encoder = Encoder(spec)
        self.decoder = Decoder(spec)
        self.discriminator = Discriminator(spec) if spec.discriminator_head else None

    # ----- Shapes -----

    def _as_batch(self, x: torch.Tensor) -> tuple[torch.Tensor, bool]:
        shape = tuple(self.spec.input_shape)
        if tuple(x.shape[-2:]) != shape:
            raise ArgumentError(f"expected trailing shape {shape}, got {tuple(x.shape)}")
        if x.dim() == 2:
            return x[None, None], True
        if x.dim() == 3:
            return x.unsqueeze(1), False
        if x.dim() == 4 and x.shape[1] == 1:
            return x, False
        raise ArgumentError(f"cannot read a magnitude batch from shape {tuple(x.shape)}")

    # ----- Forward passes -----

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        batch, single = self._as_batch(x)
        h = self.encoder(batch)
        return h[0] if single else h

    def decode(self, h: torch.Tensor) -> torch.Tensor:
        if h.shape[-1] != self.spec.latent_dim or h.dim() not in (1, 2):
            raise ArgumentError(f"expected latent of size {self.spec.latent_dim}, got {tuple(h.shape)}")
        if h.dim() == 1:
            return self.decoder(h[None])[0, 0]
        return self.decoder(h)

    def reconstruct(self, x: torch.Tensor) -> torch.Tensor:
        batch, single = self._as_batch(x)
        y = self.decoder(self.encoder(batch))
        return y[0, 0] if single else y

    def discriminate(self, y: torch.Tensor) -> torch.Tensor:
        if self.discriminator is None:
            raise ConfigurationError("network spec was built without a discriminator head")
        batch, single = self._as_batch(y)
        p = self.discriminator(batch)
        return p[0] if single else p

    # ----- Parameter groups -----

    def ae_parameters(self) -> list[nn.Parameter]:
        return [*self.encoder.parameters(), *self.decoder.parameters()]

    def disc_parameters(self) -> list[nn.Parameter]:
        return [] if self.discriminator is None else list(self.discriminator.parameters())

    def is_finite(self) -> bool:
        return all(bool(torch.isfinite(p).all()) for p in self.parameters())


class CassModel(nn.Module):
    def __init__(
        self,
        components: list[ComponentModel],
        mode: Mode | str = Mode.CASS,
        loss_weights: LossWeights | None = None,
        names: list[str] | None = None,
    ):
        super().__init__()
        if len(components) < 2:
            raise ConfigurationError(f"need at least 2 components, got {len(components)}")
        self.components = nn.ModuleList(components)
        self.mode = Mode(mode)
        self.loss_weights = loss_weights or LossWeights()
        self.names = list(names) if names else [f"component_{i}" for i in range(len(components))]
        if self.mode != Mode.BASELINE and any(c.discriminator is None for c in components):
            raise ConfigurationError(f"mode {self.mode.value} needs a discriminator per component")

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def spec(self) -> NetworkSpec:
        return self.components[0].spec

    def component(self, i: int) -> ComponentModel:
        if not 0 <= i < self.k:
            raise ArgumentError(f"component index {i} out of range for K={self.k}")
        return self.components[i]


# ----- Construction -----

def component_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


def build_component(spec: NetworkSpec, init_seed: int) -> ComponentModel:
    """Networks for one component, initialized from ``init_seed`` alone."""
    try:
        spec = NetworkSpec.model_validate(spec.model_dump())
    except ValidationError as e:
        raise ConfigurationError(f"invalid network spec: {e}") from e
    if spec.input_shape is None:
        raise ConfigurationError("network spec has no input_shape")

    # module constructors draw default inits from the global RNG; keep it untouched
    with torch.random.fork_rng(devices=[]):
        component = ComponentModel(spec)
    generator = torch.Generator().manual_seed(init_seed)
    init_weights(component.encoder, spec.nonlinearity, generator, head_gain=1.0)
    init_weights(component.decoder, spec.nonlinearity, generator, head_gain=math.sqrt(2.0))
    if component.discriminator is not None:
        init_weights(component.discriminator, spec.nonlinearity, generator, head_gain=0.01)
    return component


def build_model(
    spec: NetworkSpec,
    k: int,
    mode: Mode | str = Mode.CASS,
    loss_weights: LossWeights | None = None,
    seed: int = 0,
    names: list[str] | None = None,
) -> CassModel:
    components = [build_component(spec, component_seed(seed, i)) for i in range(k)]
    model = CassModel(components, mode, loss_weights, names)
    params = sum(p.numel() for p in model.parameters())
    logger.info(f"Built {Mode(mode).value} model: K={k}, input {spec.input_shape}, {params} parameters")
    return model


# ----- Functional surface -----

def encode(c: ComponentModel, x: torch.Tensor) -> torch.Tensor:
    return c.encode(x)


def decode(c: ComponentModel, h: torch.Tensor) -> torch.Tensor:
    return c.decode(h)


def reconstruct(c: ComponentModel, x: torch.Tensor) -> torch.Tensor:
    return c.reconstruct(x)


def discriminate(c: ComponentModel, y: torch.Tensor) -> torch.Tensor:
    return c.discriminate(y)


def separate(model: CassModel, x: torch.Tensor, batch_size: int | None = None) -> torch.Tensor:
    """AE_i(X) for every component over a [N, F, T] batch, returned as [N, K, F, T]."""
    batch_size = batch_size or config.EVAL_BATCH
    was_training = model.training
    model.eval()
    chunks = []
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            xb = x[start:start + batch_size]
            chunks.append(torch.stack([c.reconstruct(xb)[:, 0] for c in model.components], dim=1))
    model.train(was_training)
    return torch.cat(chunks, dim=0)
