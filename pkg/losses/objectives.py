"""
Reconstruction and adversarial objectives.

Tensor-level forms (``cass_ae_loss``, ``discriminator_loss``,
``cross_discriminator_loss``) take network outputs. Model-level forms
(``ae_loss``, ``disc_loss``, ``disc_loss_cross``) run the networks of
component i on a batch. ``*_objective`` adds gradients with respect to the
network being updated and nothing else.
"""
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import torch
import torch.nn.functional as F
from torch import nn

from errors import ArgumentError, ConfigurationError
from losses.weights import LossWeights

if TYPE_CHECKING:
    from model.cass import CassModel

PROB_EPS = 1e-7


@dataclass(frozen=True)
class Batch:
    mixture: torch.Tensor  # [N, F, T]
    targets: torch.Tensor  # [N, K, F, T]

    def __post_init__(self):
        if self.mixture.dim() != 3 or self.targets.dim() != 4:
            raise ArgumentError(
                f"expected mixture [N, F, T] and targets [N, K, F, T], "
                f"got {tuple(self.mixture.shape)} and {tuple(self.targets.shape)}"
            )
        if self.mixture.shape[0] != self.targets.shape[0] or self.mixture.shape[1:] != self.targets.shape[2:]:
            raise ArgumentError("mixture and targets disagree on batch or spectrogram shape")


@dataclass
class Objective:
    loss: torch.Tensor
    params: list[nn.Parameter]
    grads: tuple[torch.Tensor, ...]


# ----- Elementary losses -----

def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    if pred.shape != target.shape:
        raise ArgumentError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return F.mse_loss(pred, target)


def bce_loss(prob, label: float) -> torch.Tensor:
    """Binary cross entropy against a constant label, averaged over the batch."""
    prob = torch.as_tensor(prob)
    if not prob.is_floating_point():
        prob = prob.to(torch.get_default_dtype())
    prob = prob.clamp(PROB_EPS, 1 - PROB_EPS)
    return F.binary_cross_entropy(prob, torch.full_like(prob, float(label)))


def cass_ae_loss(pred: torch.Tensor, target: torch.Tensor, d_fake: torch.Tensor | None, w: LossWeights) -> torch.Tensor:
    """alpha * MSE(pred, target) + beta * BCE(D(pred), 1); the beta term is dropped when beta is 0."""
    loss = w.alpha * mse_loss(pred, target)
    if w.beta != 0 and d_fake is not None:
        loss = loss + w.beta * bce_loss(d_fake, 1.0)
    return loss


def discriminator_loss(d_fake: torch.Tensor, d_real: torch.Tensor) -> torch.Tensor:
    return bce_loss(d_fake, 0.0) + bce_loss(d_real, 1.0)


def cross_discriminator_loss(
    d_fake: torch.Tensor,
    d_real: torch.Tensor,
    d_cross: Mapping[int, torch.Tensor],
    weights: Mapping[int, float],
) -> torch.Tensor:
    loss = discriminator_loss(d_fake, d_real)
    for j, weight in weights.items():
        if weight == 0:
            continue
        if j not in d_cross:
            raise ConfigurationError(f"no discriminator output for source component {j}")
        loss = loss + weight * bce_loss(d_cross[j], 0.0)
    return loss


def gan_minmax_reference(d_real: torch.Tensor, d_fake: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """(E[log D(x)], E[1 - log D(G(z))]) on clamped outputs; the discriminator maximizes their sum."""
    d_real = torch.as_tensor(d_real).clamp(PROB_EPS, 1 - PROB_EPS)
    d_fake = torch.as_tensor(d_fake).clamp(PROB_EPS, 1 - PROB_EPS)
    return torch.log(d_real).mean(), (1 - torch.log(d_fake)).mean()


# ----- Model-level losses -----

def _require_adversarial(model: "CassModel") -> None:
    if model.mode == "baseline":
        raise ConfigurationError("baseline mode trains no discriminators")


def ae_loss(model: "CassModel", i: int, batch: Batch, w: LossWeights | None = None) -> torch.Tensor:
    c = model.component(i)
    w = w or model.loss_weights
    pred = c.reconstruct(batch.mixture)[:, 0]
    target = batch.targets[:, i]
    if model.mode == "baseline":
        return mse_loss(pred, target)
    d_fake = c.discriminate(pred) if w.beta != 0 else None
    return cass_ae_loss(pred, target, d_fake, w)


def disc_loss(model: "CassModel", i: int, batch: Batch) -> torch.Tensor:
    _require_adversarial(model)
    c = model.component(i)
    with torch.no_grad():
        fake = c.reconstruct(batch.mixture)
    return discriminator_loss(c.discriminate(fake), c.discriminate(batch.targets[:, i]))


def disc_loss_cross(
    model: "CassModel",
    i: int,
    batch: Batch,
    w: LossWeights | None = None,
    cross_outputs: torch.Tensor | None = None,
) -> torch.Tensor:
    """disc_loss plus sum_j alpha_j * BCE(D_i(AE_j(X)), 0).

    ``cross_outputs`` is an optional [N, K, F, T] snapshot of every AE_j(X);
    without it each AE_j is evaluated on the batch here.
    """
    _require_adversarial(model)
    c = model.component(i)
    w = w or model.loss_weights
    weights = w.cross_weights_for(i, model.k)
    loss = disc_loss(model, i, batch)
    for j, weight in weights.items():
        if weight == 0:
            continue
        if cross_outputs is not None:
            fake_j = cross_outputs[:, j]
        else:
            with torch.no_grad():
                fake_j = model.component(j).reconstruct(batch.mixture)
        loss = loss + weight * bce_loss(c.discriminate(fake_j), 0.0)
    return loss


# ----- Objectives with gradients -----

def _objective(loss: torch.Tensor, params: list[nn.Parameter]) -> Objective:
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    grads = tuple(torch.zeros_like(p) if g is None else g for p, g in zip(params, grads))
    return Objective(loss.detach(), params, grads)


def ae_objective(model: "CassModel", i: int, batch: Batch, w: LossWeights | None = None) -> Objective:
    return _objective(ae_loss(model, i, batch, w), model.component(i).ae_parameters())


def disc_objective(model: "CassModel", i: int, batch: Batch) -> Objective:
    return _objective(disc_loss(model, i, batch), model.component(i).disc_parameters())


def disc_objective_cross(
    model: "CassModel",
    i: int,
    batch: Batch,
    w: LossWeights | None = None,
    cross_outputs: torch.Tensor | None = None,
) -> Objective:
    return _objective(disc_loss_cross(model, i, batch, w, cross_outputs), model.component(i).disc_parameters())
