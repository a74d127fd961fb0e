import numpy as np

from proxsplit.rng import Stream, mix64, substream_seed


def test_mix64_reference_values():
    # splitmix64 finalizer fixed points / published test vector:
    # seed 0 advanced by the golden-ratio increment gives this first output
    assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert mix64(0) == 0


def test_stream_is_deterministic():
    a = Stream(12345).uniforms(100)
    b = Stream(12345).uniforms(100)
    assert np.array_equal(a, b)
    g1 = Stream(77).gaussians(257)
    g2 = Stream(77).gaussians(257)
    assert np.array_equal(g1, g2)


def test_stream_is_counter_based():
    # draws are a pure function of the counter: one big batch equals many
    # small batches
    s = Stream(5)
    big = s.uniforms(50)
    s2 = Stream(5)
    small = np.concatenate([s2.uniforms(7), s2.uniforms(13), s2.uniforms(30)])
    assert np.array_equal(big, small)


def test_uniforms_in_unit_interval():
    u = Stream(99).uniforms(10_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.02


def test_gaussian_moments():
    g = Stream(2024).gaussians(200_000)
    assert abs(g.mean()) < 0.01
    assert abs(g.var() - 1.0) < 0.01


def test_substreams_differ_and_are_stable():
    s = substream_seed(20170520, 1)
    t = substream_seed(20170520, 2)
    assert s != t
    assert s == substream_seed(20170520, 1)
    # different master seeds give different substreams
    assert s != substream_seed(20170521, 1)


def test_different_seeds_give_different_streams():
    assert not np.array_equal(Stream(1).uniforms(20), Stream(2).uniforms(20))
