"""
Per-component encoder/decoder/discriminator networks and the K-component model.
"""
from model.cass import (
    CassModel,
    ComponentModel,
    Mode,
    build_component,
    build_model,
    component_seed,
    decode,
    discriminate,
    encode,
    reconstruct,
    separate,
)
from model.networks import NetworkSpec

__all__ = [
    "CassModel",
    "ComponentModel",
    "Mode",
    "NetworkSpec",
    "build_component",
    "build_model",
    "component_seed",
    "decode",
    "discriminate",
    "encode",
    "reconstruct",
    "separate",
]
