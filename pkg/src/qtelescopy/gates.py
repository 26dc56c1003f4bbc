"""Photonic gate library and projective measurement bases.

Two families of operations act on the truncated Fock register:

* passive linear optics (beam splitters, phase shifts), lifted exactly to
  the bosonic space by expanding creation-operator polynomials, and
* Fock-qubit gates (NOT, CNOT, CZ, Z) defined on the dual-rail occupation
  subspace {0, 1} per mode; labels with two or more photons on a target
  mode are flagged invalid rather than silently mapped.

The beam splitter convention is ``u = [[1, i], [i, 1]] / sqrt(2)``: the
reflected amplitude picks up the factor ``i``, so a single photon entering
the first port exits as ``(|10> + i|01>) / sqrt(2)`` and two photons
entering opposite ports bunch as ``i (|20> + |02>) / sqrt(2)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, sqrt
from typing import Sequence

import numpy as np

from .errors import InvalidSubspaceError
from .state_engine import (
    ModeUnitary,
    NORM_ATOL,
    StateVector,
    _apply_stack,
    _invalid_mass,
    basis_index,
    labels_array,
    space_dim,
)

_LIFT_ATOL = 1e-12


# ---------------------------------------------------------------------------
# passive linear optics


def _lift_matrix(u: np.ndarray, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Bosonic lift of a 2x2 mode unitary with per-column cutoff masks.

    Input labels whose image would spill past ``n_max`` photons on either
    mode get a zero column and ``valid_mask`` False; all other columns are
    exactly norm-preserving because photon number is conserved.
    """
    d = n_max + 1
    dim = d * d
    mat = np.zeros((dim, dim), dtype=complex)
    mask = np.ones(dim, dtype=bool)
    for j, (m, n) in enumerate(labels_array(2, n_max)):
        m, n = int(m), int(n)
        amp: dict[tuple[int, int], complex] = defaultdict(complex)
        for p in range(m + 1):
            for q in range(n + 1):
                k, l = p + q, (m - p) + (n - q)
                coeff = (
                    comb(m, p)
                    * comb(n, q)
                    * u[0, 0] ** p
                    * u[1, 0] ** (m - p)
                    * u[0, 1] ** q
                    * u[1, 1] ** (n - q)
                    * sqrt(factorial(k) * factorial(l) / (factorial(m) * factorial(n)))
                )
                amp[(k, l)] += coeff
        kept = 0.0
        for (k, l), a in amp.items():
            if k <= n_max and l <= n_max:
                kept += abs(a) ** 2
        if kept < 1.0 - _LIFT_ATOL:
            mask[j] = False
            continue
        for (k, l), a in amp.items():
            if k <= n_max and l <= n_max:
                mat[k * d + l, j] = a
    return mat, mask


def two_mode_unitary(
    u: np.ndarray, mode_a: int, mode_b: int, n_max: int, name: str = ""
) -> ModeUnitary:
    """Lift an arbitrary 2x2 passive unitary onto a pair of modes."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    mat, mask = _lift_matrix(u, n_max)
    return ModeUnitary((mode_a, mode_b), mat, n_max, mask, name or "two_mode_unitary")


@lru_cache(maxsize=None)
def _balanced_lift(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / np.sqrt(2.0)
    mat, mask = _lift_matrix(u, n_max)
    mat.setflags(write=False)
    mask.setflags(write=False)
    return mat, mask


def beam_splitter(mode_a: int, mode_b: int, n_max: int) -> ModeUnitary:
    """Balanced beam splitter with the i-on-reflection convention."""
    mat, mask = _balanced_lift(n_max)
    return ModeUnitary((mode_a, mode_b), mat, n_max, mask, "beam_splitter")


def phase_shift(mode: int, theta: float, n_max: int) -> ModeUnitary:
    """Single-mode phase shift |n> -> exp(i n theta) |n>."""
    phases = np.exp(1j * theta * np.arange(n_max + 1))
    return ModeUnitary((mode,), np.diag(phases), n_max, None, "phase_shift")


# ---------------------------------------------------------------------------
# Fock-qubit gates (dual-rail occupation subspace)


def _qubit_mask(k_modes: int, n_max: int) -> np.ndarray:
    labs = labels_array(k_modes, n_max)
    return np.all(labs <= 1, axis=1)


def _qubit_gate(
    perm_phase: dict[tuple[int, ...], tuple[tuple[int, ...], complex]],
    modes: Sequence[int],
    n_max: int,
    name: str,
) -> ModeUnitary:
    k = len(modes)
    dim = space_dim(k, n_max)
    mat = np.zeros((dim, dim), dtype=complex)
    mask = _qubit_mask(k, n_max)
    for label, (image, phase) in perm_phase.items():
        mat[basis_index(image, n_max), basis_index(label, n_max)] = phase
    return ModeUnitary(tuple(modes), mat, n_max, mask, name)


def not_fock(mode: int, n_max: int) -> ModeUnitary:
    """Create or destroy the photon on a dual-rail mode: |0> <-> |1>."""
    table = {(0,): ((1,), 1.0), (1,): ((0,), 1.0)}
    return _qubit_gate(table, (mode,), n_max, "not_fock")


def z_fock(mode: int, n_max: int) -> ModeUnitary:
    """Phase flip on a dual-rail mode: |1> -> -|1>."""
    table = {(0,): ((0,), 1.0), (1,): ((1,), -1.0)}
    return _qubit_gate(table, (mode,), n_max, "z_fock")


def cnot_fock(control: int, target: int, n_max: int) -> ModeUnitary:
    """Photon created or destroyed in ``target`` iff ``control`` holds one.

    Defined on occupations {0, 1} of both modes; two or more photons on
    either mode is outside the gate's domain.
    """
    table = {
        (0, 0): ((0, 0), 1.0),
        (0, 1): ((0, 1), 1.0),
        (1, 0): ((1, 1), 1.0),
        (1, 1): ((1, 0), 1.0),
    }
    return _qubit_gate(table, (control, target), n_max, "cnot_fock")


def cz_fock(mode_a: int, mode_b: int, n_max: int) -> ModeUnitary:
    """Controlled phase flip: |11> -> -|11> on a dual-rail mode pair."""
    table = {
        (0, 0): ((0, 0), 1.0),
        (0, 1): ((0, 1), 1.0),
        (1, 0): ((1, 0), 1.0),
        (1, 1): ((1, 1), -1.0),
    }
    return _qubit_gate(table, (mode_a, mode_b), n_max, "cz_fock")


# ---------------------------------------------------------------------------
# projective measurement bases


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Complete set of orthogonal projectors on a subset of modes.

    ``projectors[i]`` acts on the local space of ``target_modes`` and
    corresponds to ``outcomes[i]``.  ``valid_mask`` plays the same role as
    for gates: local labels outside it must carry no probability.
    """

    target_modes: tuple[int, ...]
    projectors: tuple[np.ndarray, ...]
    outcomes: tuple
    n_max: int
    valid_mask: np.ndarray
    name: str = ""

    def __post_init__(self):
        dloc = space_dim(len(self.target_modes), self.n_max)
        for proj in self.projectors:
            if proj.shape != (dloc, dloc):
                raise ValueError("projector shape does not match the target modes")
        if len(self.projectors) != len(self.outcomes):
            raise ValueError("one outcome per projector required")


def number_basis(mode: int, n_max: int) -> MeasurementBasis:
    """Photon-number measurement of a single mode."""
    projs = []
    for n in range(n_max + 1):
        p = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        p[n, n] = 1.0
        projs.append(p)
    return MeasurementBasis(
        (mode,),
        tuple(projs),
        tuple(range(n_max + 1)),
        n_max,
        np.ones(n_max + 1, dtype=bool),
        "number",
    )


def rotated_basis(mode: int, delta: float, n_max: int) -> MeasurementBasis:
    """Dual-rail superposition basis |+-_delta> = (|0> +- e^{i delta} |1>)/sqrt(2).

    Defined on the qubit subspace only; outcomes are the eigenvalues +1/-1.
    """
    d = n_max + 1
    projs = []
    for sign in (+1.0, -1.0):
        p = np.zeros((d, d), dtype=complex)
        p[0, 0] = p[1, 1] = 0.5
        p[1, 0] = sign * 0.5 * np.exp(1j * delta)
        p[0, 1] = sign * 0.5 * np.exp(-1j * delta)
        projs.append(p)
    mask = _qubit_mask(1, n_max)
    return MeasurementBasis((mode,), tuple(projs), (+1, -1), n_max, mask, "rotated")


def x_basis(mode: int, n_max: int) -> MeasurementBasis:
    """Dual-rail X measurement, the delta = 0 rotated basis."""
    basis = rotated_basis(mode, 0.0, n_max)
    return MeasurementBasis(
        basis.target_modes, basis.projectors, basis.outcomes, n_max, basis.valid_mask, "x"
    )


def parity_basis(mode_a: int, mode_b: int, n_max: int) -> MeasurementBasis:
    """Total photon-number parity of a mode pair: outcomes 0 (even), 1 (odd)."""
    labs = labels_array(2, n_max)
    totals = labs.sum(axis=1)
    projs = []
    for par in (0, 1):
        projs.append(np.diag((totals % 2 == par).astype(complex)))
    dim = space_dim(2, n_max)
    return MeasurementBasis(
        (mode_a, mode_b),
        tuple(projs),
        (0, 1),
        n_max,
        np.ones(dim, dtype=bool),
        "parity",
    )


def measurement_distribution(state, basis: MeasurementBasis, *, atol: float = NORM_ATOL) -> np.ndarray:
    """Outcome probabilities of a projective measurement."""
    _check_basis_support(state, basis, atol)
    probs = np.empty(len(basis.projectors))
    for i, proj in enumerate(basis.projectors):
        probs[i] = _projection_weight(state, basis.target_modes, proj)
    return probs


def measure_in_basis(state: StateVector, basis: MeasurementBasis, rng=None, *, atol: float = NORM_ATOL):
    """Sample one outcome and collapse. Returns ``(outcome, post_state)``."""
    if not isinstance(state, StateVector):
        raise TypeError("basis sampling requires a StateVector")
    rng = np.random.default_rng(rng)
    _check_basis_support(state, basis, atol)
    weights = np.array(
        [_projection_weight(state, basis.target_modes, p) for p in basis.projectors]
    )
    total = weights.sum()
    idx = int(rng.choice(len(weights), p=weights / total))
    op = ModeUnitary(
        basis.target_modes, basis.projectors[idx], basis.n_max, None, basis.name
    )
    projected = _apply_stack(op, state.amplitudes.reshape(-1, 1), state.mode_count)
    post = StateVector(
        projected.reshape(-1) / np.sqrt(weights[idx]), state.mode_count, state.n_max
    )
    return basis.outcomes[idx], post


def project(state: StateVector, basis: MeasurementBasis, outcome, *, atol: float = NORM_ATOL):
    """Project onto one declared outcome without sampling.

    Returns ``(probability, normalized post-measurement state)``; the state
    is ``None`` when the outcome has zero weight.  Useful for enumerating
    measurement branches deterministically.
    """
    if not isinstance(state, StateVector):
        raise TypeError("branch projection requires a StateVector")
    _check_basis_support(state, basis, atol)
    try:
        idx = basis.outcomes.index(outcome)
    except ValueError:
        raise ValueError(f"{outcome!r} is not an outcome of {basis.name or 'this basis'}")
    weight = _projection_weight(state, basis.target_modes, basis.projectors[idx])
    if weight <= 0.0:
        return 0.0, None
    op = ModeUnitary(
        basis.target_modes, basis.projectors[idx], basis.n_max, None, basis.name
    )
    projected = _apply_stack(op, state.amplitudes.reshape(-1, 1), state.mode_count)
    post = StateVector(
        projected.reshape(-1) / np.sqrt(weight), state.mode_count, state.n_max
    )
    return float(weight), post


def _check_basis_support(state, basis: MeasurementBasis, atol: float) -> None:
    if basis.valid_mask.all():
        return
    probe = ModeUnitary(
        basis.target_modes,
        np.zeros_like(basis.projectors[0]),
        basis.n_max,
        basis.valid_mask,
        basis.name,
    )
    mass = _invalid_mass(probe, state.probabilities(), state.mode_count)
    if mass > atol:
        raise InvalidSubspaceError(
            f"{basis.name or 'basis'} measurement on modes {basis.target_modes} is "
            f"undefined outside the dual-rail subspace; input carries {mass:.3e} there"
        )


def _projection_weight(state, target_modes: tuple[int, ...], proj: np.ndarray) -> float:
    if isinstance(state, StateVector):
        op = ModeUnitary(target_modes, proj, state.n_max)
        projected = _apply_stack(op, state.amplitudes.reshape(-1, 1), state.mode_count)
        return float(np.vdot(state.amplitudes, projected.reshape(-1)).real)
    op = ModeUnitary(target_modes, proj, state.n_max)
    half = _apply_stack(op, state.matrix, state.mode_count)
    return float(np.real(np.trace(half)))
