import math

import pytest
import torch

from errors import ArgumentError, ConfigurationError
from model import CassModel, Mode, NetworkSpec, build_component, build_model, component_seed, separate


def _conv(in_ch, out_ch, k):
    return in_ch * out_ch * k * k + out_ch


def expected_parameters(spec: NetworkSpec) -> int:
    """Closed-form count for encoder + decoder + discriminator."""
    c = spec.channel_schedule
    h, w = spec.stage_sizes()[-1]
    flat = c[-1] * h * w
    trunk = _conv(1, c[0], 3) + 2 * _conv(c[0], c[0], 3)
    for b in range(1, spec.block_count):
        trunk += _conv(c[b - 1], c[b], 3) + _conv(c[b], c[b], 3) + _conv(c[b - 1], c[b], 1)
    encoder = trunk + flat * spec.latent_dim + spec.latent_dim
    decoder = spec.latent_dim * flat + flat
    for b in range(spec.block_count - 1, 0, -1):
        decoder += _conv(c[b], c[b - 1], 3) + _conv(c[b - 1], c[b - 1], 3)
        if c[b] != c[b - 1]:
            decoder += _conv(c[b], c[b - 1], 1)
    decoder += 2 * _conv(c[0], c[0], 3) + _conv(c[0], 1, 3)
    discriminator = trunk + flat + 1 if spec.discriminator_head else 0
    return encoder + decoder + discriminator


SPECS = [
    NetworkSpec(input_shape=(4, 4), latent_dim=2, channel_schedule=(2,), block_count=1, nonlinearity="tanh"),
    NetworkSpec(input_shape=(17, 11), latent_dim=8, channel_schedule=(4, 8, 8), block_count=3),
    NetworkSpec(input_shape=(33, 21), latent_dim=16, channel_schedule=(4, 4), block_count=2, nonlinearity="leaky_relu"),
    NetworkSpec(input_shape=(129, 20), latent_dim=32, discriminator_head=False, nonlinearity="elu"),
]


def test_toy_parameter_count_by_hand(toy_spec):
    component = build_component(toy_spec, 0)
    assert sum(p.numel() for p in component.parameters()) == 482


@pytest.mark.parametrize("spec", SPECS)
def test_parameter_count_matches_formula(spec):
    component = build_component(spec, 0)
    assert sum(p.numel() for p in component.parameters()) == expected_parameters(spec)


@pytest.mark.parametrize("spec", SPECS)
def test_shape_algebra(spec):
    c = build_component(spec, 1)
    x = torch.rand(*spec.input_shape)
    h = c.encode(x)
    assert h.shape == (spec.latent_dim,)
    assert spec.latent_dim < math.prod(spec.input_shape)
    y = c.decode(h)
    assert y.shape == spec.input_shape
    assert torch.all(y >= 0)
    assert torch.isfinite(h).all() and torch.isfinite(y).all()
    batch = torch.rand(3, *spec.input_shape)
    assert c.encode(batch).shape == (3, spec.latent_dim)
    assert c.reconstruct(batch).shape == (3, 1, *spec.input_shape)
    if spec.discriminator_head:
        assert c.discriminate(x).shape == ()
        assert c.discriminate(batch).shape == (3,)


def test_reconstruct_is_decode_of_encode(toy_spec):
    c = build_component(toy_spec, 2).double()
    x = torch.rand(4, 4, dtype=torch.float64)
    assert torch.equal(c.reconstruct(x), c.decode(c.encode(x)))
    assert torch.equal(c.encode(x), c.encode(x.clone()))
    assert torch.equal(c.discriminate(x), c.discriminate(x.clone()))


def test_same_seed_same_parameters(toy_spec):
    a, b, other = build_component(toy_spec, 5), build_component(toy_spec, 5), build_component(toy_spec, 6)
    assert all(torch.equal(p, q) for p, q in zip(a.parameters(), b.parameters()))
    assert not all(torch.equal(p, q) for p, q in zip(a.parameters(), other.parameters()))


def test_building_leaves_global_rng_alone(toy_spec):
    torch.manual_seed(0)
    expected = torch.rand(3)
    torch.manual_seed(0)
    build_component(toy_spec, 1)
    assert torch.equal(torch.rand(3), expected)


def test_components_get_distinct_seeds(toy_spec):
    model = build_model(toy_spec, 3, "cass", seed=4)
    assert len({component_seed(4, i) for i in range(3)}) == 3
    first, second = model.component(0), model.component(1)
    assert not torch.equal(first.encoder.head.weight, second.encoder.head.weight)


def test_latent_must_reduce_dimension():
    with pytest.raises(ValueError):
        NetworkSpec(input_shape=(4, 4), latent_dim=16, channel_schedule=(2,), block_count=1)
    with pytest.raises(ValueError):
        NetworkSpec(input_shape=(4, 4), latent_dim=2, channel_schedule=(2, 4), block_count=1)
    with pytest.raises(ConfigurationError):
        build_component(NetworkSpec(latent_dim=2, channel_schedule=(2,), block_count=1), 0)


def test_wrong_input_shape_rejected(toy_spec):
    c = build_component(toy_spec, 0)
    with pytest.raises(ArgumentError):
        c.encode(torch.rand(5, 4))
    with pytest.raises(ArgumentError):
        c.decode(torch.rand(3))


def test_fresh_discriminator_is_undecided():
    spec = NetworkSpec(input_shape=(17, 11), latent_dim=8, channel_schedule=(4, 8), block_count=2)
    c = build_component(spec, 3)
    gen = torch.Generator().manual_seed(0)
    with torch.no_grad():
        p = c.discriminate(torch.rand(100, 17, 11, generator=gen))
    assert torch.all((p > 0) & (p < 1))
    assert 0.2 < float(p.mean()) < 0.8


def test_discriminator_output_is_clamped(toy_spec):
    c = build_component(toy_spec, 0)
    with torch.no_grad():
        c.discriminator.head.bias.fill_(1e4)
    p = c.discriminate(torch.rand(4, 4))
    assert 0 < float(p) < 1


def test_encode_is_continuous(toy_spec):
    c = build_component(toy_spec, 7).double()
    x = torch.rand(4, 4, dtype=torch.float64)
    direction = torch.rand(4, 4, dtype=torch.float64)
    base = c.encode(x)
    gaps = [float(torch.linalg.norm(c.encode(x + eps * direction) - base)) for eps in (1e-1, 1e-3, 1e-5)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_model_invariants(toy_spec):
    no_head = toy_spec.model_copy(update={"discriminator_head": False})
    with pytest.raises(ConfigurationError):
        CassModel([build_component(toy_spec, 0)])
    with pytest.raises(ConfigurationError):
        CassModel([build_component(no_head, 0), build_component(no_head, 1)], mode="cass")
    baseline = CassModel([build_component(no_head, 0), build_component(no_head, 1)], mode="baseline")
    assert baseline.mode is Mode.BASELINE and baseline.k == 2
    with pytest.raises(ArgumentError):
        baseline.component(2)
    assert all(c.is_finite() for c in baseline.components)


def test_separate_matches_per_component_reconstruct(toy_model):
    x = torch.rand(5, 4, 4, dtype=torch.float64)
    out = separate(toy_model, x, batch_size=2)
    assert out.shape == (5, 2, 4, 4)
    for i, c in enumerate(toy_model.components):
        with torch.no_grad():
            assert torch.allclose(out[:, i], c.reconstruct(x)[:, 0], rtol=0, atol=1e-12)
    assert toy_model.training
