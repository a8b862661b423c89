import numpy as np
import pytest

from squintless.model import (MultiFreqTensor, Scenario, ScenarioError, Source, atom,
                              separation_1d, separation_2d, steering_vector, synthesize,
                              wrap_distance)


def test_steering_vector_entries():
    a = steering_vector(0.25, 2, 4)
    # exp(-j 2 pi i * 0.5) = (-1)^i
    np.testing.assert_allclose(a, [1, -1, 1, -1], atol=1e-15)


def test_atom_is_rank_one_per_slice():
    t = atom(0.1, 0.3, [1.0, 0.5j], 5, 4)
    assert t.shape == (2, 5, 4)
    for p in range(2):
        s = np.linalg.svd(t[p], compute_uv=False)
        assert s[1] < 1e-12 * s[0]


def test_single_source_slice_value():
    scen = Scenario(3, 3, 1, [Source(0.0, 0.0, [2.0])])
    y = synthesize(scen)
    np.testing.assert_allclose(y[1], 2 * np.ones((3, 3)))


def test_two_sources_add_linearly():
    s1, s2 = Source(0.1, 0.2, [1, 1j]), Source(0.4, 0.7, [0.5, -1])
    y = synthesize(Scenario(4, 5, 2, [s1, s2]))
    ref = atom(0.1, 0.2, [1, 1j], 4, 5) + atom(0.4, 0.7, [0.5, -1], 4, 5)
    np.testing.assert_allclose(y.slices, ref, atol=1e-14)


def test_frequency_index_scales_phase():
    y = synthesize(Scenario(2, 2, 3, [Source(0.1, 0.0, [1, 1, 1])]))
    # entry (1, 0) of slice p is exp(-j 2 pi p 0.1)
    for p in (1, 2, 3):
        assert abs(y[p][1, 0] - np.exp(-2j * np.pi * p * 0.1)) < 1e-14


def test_angles_wrap_mod_one():
    assert Source(1.25, -0.25, [1]).omega_r == pytest.approx(0.25)
    assert Source(1.25, -0.25, [1]).omega_t == pytest.approx(0.75)


def test_zero_coefficients_rejected():
    with pytest.raises(ScenarioError):
        Source(0.1, 0.1, [0, 0])


def test_coefficient_length_checked():
    with pytest.raises(ScenarioError, match=r"sources\[0\]\.coeffs"):
        Scenario(3, 3, 2, [Source(0.1, 0.1, [1])])


def test_scenario_needs_sources_and_sizes():
    with pytest.raises(ScenarioError):
        Scenario(3, 3, 1, [])
    with pytest.raises(ScenarioError):
        Scenario(1, 3, 1, [Source(0, 0, [1])])


def test_normalization_reported_not_rescaled():
    scen = Scenario(3, 3, 2, [Source(0, 0, [1, 1]), Source(0.5, 0.5, [0.6, 0.8])])
    assert scen.normalization_violations() == [0]
    np.testing.assert_allclose(scen.sources[0].coeffs, [1, 1])


def test_wrap_distance():
    assert wrap_distance(0.95, 0.05) == pytest.approx(0.1)
    assert wrap_distance(0.3, 0.1, p=3) == pytest.approx(0.4)


def test_separation_scales_with_p_and_wraps():
    assert separation_1d([0.1, 0.35], 1) == pytest.approx(0.25)
    assert separation_1d([0.1, 0.35], 4) == pytest.approx(0.0)
    assert separation_2d([(0.1, 0.2), (0.12, 0.5)]) == pytest.approx(0.3)


def test_single_source_separation_undefined():
    with pytest.raises(ValueError, match="undefined"):
        separation_2d([(0.1, 0.1)])


def test_tensor_indexing_is_one_based():
    t = MultiFreqTensor(np.arange(8).reshape(2, 2, 2))
    assert t[1][0, 0] == 0 and t[2][0, 0] == 4
    assert (t.n_freq, t.n_rx, t.n_tx) == (2, 2, 2)
