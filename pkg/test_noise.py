#!/usr/bin/env python3

import numpy as np
import pytest

from models.fields import CauchyData
from models.grid import TimePartition, build_grid, classify_nodes
from tools.noise import NoiseSpec, add_noise, generators, noisy_checksum, perturb


@pytest.fixture
def cauchy():
    nodes = classify_nodes(build_grid(1.0, 4))
    rng = np.random.default_rng(3)
    F = rng.uniform(-2.0, 2.0, (6, 16))
    G = rng.uniform(-2.0, 2.0, (6, 12))
    return CauchyData(nodes, TimePartition(1.0, 5), F, G)


def test_zero_noise_returns_input(cauchy):
    assert add_noise(cauchy, NoiseSpec(0.0, seed=11)) is cauchy


def test_zero_data_stays_zero(cauchy):
    zero = CauchyData(cauchy.nodes, cauchy.partition, np.zeros_like(cauchy.F), np.zeros_like(cauchy.G))
    noisy = add_noise(zero, NoiseSpec(0.5))
    assert np.all(noisy.F == 0.0)
    assert np.all(noisy.G == 0.0)


def test_multiplier_statistics():
    f_stream, _ = generators(0)
    values = perturb(np.ones(10 ** 6), 0.5, f_stream)
    assert 0.999 <= values.mean() <= 1.001
    assert values.min() >= 0.5
    assert values.max() <= 1.5


def test_pointwise_bound(cauchy):
    delta = 0.1
    noisy = add_noise(cauchy, NoiseSpec(delta, seed=5))
    for clean, dirty in ((cauchy.F, noisy.F), (cauchy.G, noisy.G)):
        assert np.all(np.abs(dirty - clean) <= delta * np.abs(clean) + 1e-15)
    assert not np.array_equal(noisy.F, cauchy.F)


def test_same_seed_reproduces(cauchy):
    first = add_noise(cauchy, NoiseSpec(0.25, seed=42))
    second = add_noise(cauchy, NoiseSpec(0.25, seed=42))
    np.testing.assert_array_equal(first.F, second.F)
    np.testing.assert_array_equal(first.G, second.G)
    assert noisy_checksum(first) == noisy_checksum(second)


def test_different_seed_differs(cauchy):
    first = add_noise(cauchy, NoiseSpec(0.25, seed=1))
    second = add_noise(cauchy, NoiseSpec(0.25, seed=2))
    assert not np.array_equal(first.F, second.F)
    assert noisy_checksum(first) != noisy_checksum(second)


def test_streams_are_independent():
    f_stream, g_stream = generators(9)
    assert not np.array_equal(f_stream.random(100), g_stream.random(100))


F_WORDS_42 = [0x38411d067af41ba0, 0x74c9187aa4f8949a, 0x2f199840721533f3, 0x723aa4e0fa41b5cb]
G_WORDS_42 = [0xc5ed7631b55ff4dc, 0x6c8da8750fd7eeeb, 0x03a96c39ae6a9b20, 0x64d945cfbdb45f25]


def test_raw_words_match_known_answers():
    f_stream, g_stream = generators(42)
    np.testing.assert_array_equal(f_stream.bit_generator.random_raw(4), np.array(F_WORDS_42, dtype=np.uint64))
    np.testing.assert_array_equal(g_stream.bit_generator.random_raw(4), np.array(G_WORDS_42, dtype=np.uint64))


def test_uniform_draws_match_known_answers():
    f_stream, g_stream = generators(42)
    np.testing.assert_array_equal(f_stream.random(4) * 2.0 ** 53, [w >> 11 for w in F_WORDS_42])
    np.testing.assert_array_equal(g_stream.random(4) * 2.0 ** 53, [w >> 11 for w in G_WORDS_42])

    f_stream, _ = generators(42)
    factors = perturb(np.ones(4), 0.5, f_stream)
    expected = [0.2197435513325704, 0.45619347566841584, 0.18398429463748722, 0.44620733730903939]
    np.testing.assert_allclose(factors, np.array(expected) + 0.5, rtol=1e-15)


def test_input_is_untouched(cauchy):
    F = cauchy.F.copy()
    add_noise(cauchy, NoiseSpec(0.5))
    np.testing.assert_array_equal(cauchy.F, F)


def test_checksum_format(cauchy):
    digest = noisy_checksum(cauchy)
    assert len(digest) == 64
    int(digest, 16)


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        NoiseSpec(-0.01)


if __name__ == "__main__":
    pytest.main([__file__])
