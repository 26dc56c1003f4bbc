"""Tests for the truncated multimode Fock register."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtelescopy import state_engine as se
from qtelescopy.errors import InvalidSubspaceError, LeakageError


def test_space_dim_counts_occupation_patterns():
    assert se.space_dim(1, 2) == 3
    assert se.space_dim(2, 2) == 9
    assert se.space_dim(6, 2) == 729
    assert se.space_dim(4, 1) == 16


def test_basis_index_row_major_mode_zero_most_significant():
    # flat index of (n0, n1) is n0*(n_max+1) + n1
    assert se.basis_index((0, 0), 2) == 0
    assert se.basis_index((0, 1), 2) == 1
    assert se.basis_index((1, 0), 2) == 3
    assert se.basis_index((2, 1), 2) == 7


def test_basis_label_round_trip_all_indices():
    for idx in range(se.space_dim(3, 2)):
        assert se.basis_index(se.basis_label(idx, 3, 2), 2) == idx


def test_basis_labels_enumeration_order():
    assert se.basis_labels(2, 1) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    labels = se.basis_labels(3, 2)
    assert len(labels) == 27
    assert labels[0] == (0, 0, 0)
    assert labels[-1] == (2, 2, 2)
    assert all(isinstance(n, int) for lab in labels for n in lab)


def test_fock_state_has_single_amplitude():
    state = se.fock((1, 1), 2)
    amp = state.amplitudes
    assert amp[se.basis_index((1, 1), 2)] == 1.0
    assert np.count_nonzero(amp) == 1
    np.testing.assert_allclose(np.linalg.norm(amp), 1.0)


def test_vacuum_is_first_basis_vector():
    vac = se.vacuum(4, 2)
    assert vac.amplitudes[0] == 1.0
    assert np.count_nonzero(vac.amplitudes) == 1


def test_fock_rejects_occupation_beyond_cutoff():
    with pytest.raises(Exception):
        se.fock((3, 0), 2)


def test_tensor_at_builds_product_state():
    left = se.fock((1,), 2)
    right = se.fock((0, 2), 2)
    combined = se.tensor_at([(left, (0,)), (right, (1, 2))])
    expected = se.fock((1, 0, 2), 2)
    np.testing.assert_allclose(combined.amplitudes, expected.amplitudes)


def test_tensor_at_respects_mode_assignment():
    # placing the same factors on permuted modes permutes the occupations
    a = se.fock((1,), 2)
    b = se.fock((2,), 2)
    s = se.tensor_at([(a, (1,)), (b, (0,))])
    expected = se.fock((2, 1), 2)
    np.testing.assert_allclose(s.amplitudes, expected.amplitudes)


def test_tensor_at_superposition_factor():
    plus = se.StateVector(
        amplitudes=(se.fock((1, 0), 1).amplitudes + se.fock((0, 1), 1).amplitudes)
        / np.sqrt(2.0),
        mode_count=2,
        n_max=1,
    )
    full = se.tensor_at([(plus, (0, 2)), (se.fock((1,), 1), (1,))])
    expected = (
        se.fock((1, 1, 0), 1).amplitudes + se.fock((0, 1, 1), 1).amplitudes
    ) / np.sqrt(2.0)
    np.testing.assert_allclose(full.amplitudes, expected)


def test_arrange_modes_permutation():
    state = se.fock((0, 1, 2), 2)
    # current mode order (2, 0, 1): occupations seen as written live on those modes
    rearranged = se.arrange_modes(state, (2, 0, 1))
    expected = se.fock((1, 2, 0), 2)
    np.testing.assert_allclose(rearranged.amplitudes, expected.amplitudes)


def test_number_distribution_sums_to_one(rng):
    amp = rng.normal(size=27) + 1j * rng.normal(size=27)
    amp /= np.linalg.norm(amp)
    state = se.StateVector(amplitudes=amp, mode_count=3, n_max=2)
    dist = se.number_distribution(state)
    assert dist.shape == (27,)
    np.testing.assert_allclose(dist.sum(), 1.0, atol=1e-12)
    assert (dist >= 0).all()


def test_number_measurement_distribution_marginalizes(rng):
    amp = rng.normal(size=9) + 1j * rng.normal(size=9)
    amp /= np.linalg.norm(amp)
    state = se.StateVector(amplitudes=amp, mode_count=2, n_max=2)
    full = se.number_measurement_distribution(state)
    marg = se.number_measurement_distribution(state, modes=(0,))
    for n in range(3):
        expected = sum(p for lab, p in full.items() if lab[0] == n)
        np.testing.assert_allclose(marg.get((n,), 0.0), expected, atol=1e-12)


def test_number_measurement_distribution_omits_zero_entries():
    state = se.fock((1, 0), 2)
    dist = se.number_measurement_distribution(state)
    assert set(dist) == {(1, 0)}


def test_mode_occupations_expected_photon_numbers():
    state = se.StateVector(
        amplitudes=(se.fock((2, 0), 2).amplitudes + se.fock((0, 2), 2).amplitudes)
        / np.sqrt(2.0),
        mode_count=2,
        n_max=2,
    )
    np.testing.assert_allclose(se.mode_occupations(state), [1.0, 1.0], atol=1e-12)


def test_sample_and_collapse_returns_supported_outcome(rng):
    amp = rng.normal(size=9) + 1j * rng.normal(size=9)
    amp /= np.linalg.norm(amp)
    state = se.StateVector(amplitudes=amp, mode_count=2, n_max=2)
    outcome, collapsed = se.sample_and_collapse(state, rng=rng)
    assert outcome in se.number_measurement_distribution(state)
    np.testing.assert_allclose(np.linalg.norm(collapsed.amplitudes), 1.0, atol=1e-10)
    # the collapsed state is the basis state for a full-register measurement
    assert np.count_nonzero(np.abs(collapsed.amplitudes) > 1e-12) == 1


def test_sample_and_collapse_deterministic_per_seed():
    state = se.StateVector(
        amplitudes=(se.fock((1, 0), 1).amplitudes + se.fock((0, 1), 1).amplitudes)
        / np.sqrt(2.0),
        mode_count=2,
        n_max=1,
    )
    out_a = [
        se.sample_and_collapse(state, rng=np.random.default_rng(7))[0]
        for _ in range(1)
    ]
    out_b = [
        se.sample_and_collapse(state, rng=np.random.default_rng(7))[0]
        for _ in range(1)
    ]
    assert out_a == out_b


def test_partial_trace_of_product_state_is_pure():
    state = se.fock((1, 0, 2), 2)
    reduced = se.partial_trace(state, keep=(0, 2))
    np.testing.assert_allclose(np.trace(reduced.matrix), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.trace(reduced.matrix @ reduced.matrix), 1.0, atol=1e-12)


def test_partial_trace_of_entangled_pair_is_mixed():
    bell = se.StateVector(
        amplitudes=(se.fock((1, 0), 1).amplitudes + se.fock((0, 1), 1).amplitudes)
        / np.sqrt(2.0),
        mode_count=2,
        n_max=1,
    )
    reduced = se.partial_trace(bell, keep=(0,))
    np.testing.assert_allclose(np.trace(reduced.matrix), 1.0, atol=1e-12)
    np.testing.assert_allclose(
        np.trace(reduced.matrix @ reduced.matrix), 0.5, atol=1e-12
    )


def test_dump_parse_round_trip(rng):
    amp = rng.normal(size=9) + 1j * rng.normal(size=9)
    amp /= np.linalg.norm(amp)
    state = se.StateVector(amplitudes=amp, mode_count=2, n_max=2)
    back = se.parse_state(se.dump_state(state))
    assert back.mode_count == 2 and back.n_max == 2
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)


def test_save_load_round_trip(tmp_path, rng):
    amp = rng.normal(size=16) + 1j * rng.normal(size=16)
    amp /= np.linalg.norm(amp)
    state = se.StateVector(amplitudes=amp, mode_count=4, n_max=1)
    path = tmp_path / "state.txt"
    se.save_state(state, path)
    back = se.load_state(path)
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=728))
def test_basis_round_trip_property(idx):
    label = se.basis_label(idx, 6, 2)
    assert len(label) == 6
    assert all(0 <= n <= 2 for n in label)
    assert se.basis_index(label, 2) == idx


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=2), min_size=2, max_size=4))
def test_fock_index_matches_positional_weight(occ):
    state = se.fock(tuple(occ), 2)
    idx = int(np.flatnonzero(state.amplitudes)[0])
    # weight of mode m is (n_max+1)^(M-1-m)
    assert idx == sum(n * 3 ** (len(occ) - 1 - m) for m, n in enumerate(occ))
