"""
AE, GAN and cross-adversarial objectives.
"""
from losses.objectives import (
    Batch,
    Objective,
    ae_loss,
    ae_objective,
    bce_loss,
    cass_ae_loss,
    cross_discriminator_loss,
    disc_loss,
    disc_loss_cross,
    disc_objective,
    disc_objective_cross,
    discriminator_loss,
    gan_minmax_reference,
    mse_loss,
)
from losses.weights import LossWeights

__all__ = [
    "Batch",
    "LossWeights",
    "Objective",
    "ae_loss",
    "ae_objective",
    "bce_loss",
    "cass_ae_loss",
    "cross_discriminator_loss",
    "disc_loss",
    "disc_loss_cross",
    "disc_objective",
    "disc_objective_cross",
    "discriminator_loss",
    "gan_minmax_reference",
    "mse_loss",
]
