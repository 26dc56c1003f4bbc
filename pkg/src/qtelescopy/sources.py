"""Weak thermal starlight collected at two distant sites.

Within one coherence-time window the light entering the two telescope
ports is modelled at the single-photon level: with probability
``1 - epsilon`` the window is empty, and with probability ``epsilon`` a
single photon arrives delocalized over the two ports.  The conditional
one-photon state in the ordered basis ``(|10>, |01>)`` is

    rho_c = (1/2) [[1, conj(nu)], [nu, 1]],      nu = g exp(-i phi),

where ``g`` is the fringe visibility (the modulus of the mutual coherence
of the two ports) and ``phi`` the interferometric phase carrying the
pointing information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state_engine import DensityOperator, StateVector, basis_index, fock, space_dim


@dataclass(frozen=True)
class StellarSource:
    """Two-port single-photon-level source with visibility ``g`` and phase ``phi``.

    ``epsilon`` is the mean photon arrival probability per window.
    """

    phi: float
    g: float
    epsilon: float
    n_max: int = 2

    def __post_init__(self):
        if not 0.0 <= self.g <= 1.0:
            raise ValueError(f"visibility g must lie in [0, 1], got {self.g}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"arrival probability must lie in [0, 1], got {self.epsilon}")
        if self.n_max < 1:
            raise ValueError("the source needs at least a one-photon cutoff")

    @property
    def mutual_coherence(self) -> complex:
        return self.g * np.exp(-1j * self.phi)

    def conditional_matrix(self) -> np.ndarray:
        """One-photon density matrix in the ordered basis (|10>, |01>)."""
        nu = self.mutual_coherence
        return 0.5 * np.array([[1.0, np.conj(nu)], [nu, 1.0]])

    def conditional_purity(self) -> float:
        return 0.5 * (1.0 + self.g**2)

    def density_operator(self) -> DensityOperator:
        """Full two-mode window state including the vacuum component."""
        dim = space_dim(2, self.n_max)
        mat = np.zeros((dim, dim), dtype=complex)
        i00 = basis_index((0, 0), self.n_max)
        i10 = basis_index((1, 0), self.n_max)
        i01 = basis_index((0, 1), self.n_max)
        mat[i00, i00] = 1.0 - self.epsilon
        block = self.epsilon * self.conditional_matrix()
        mat[np.ix_([i10, i01], [i10, i01])] = block
        return DensityOperator(mat, 2, self.n_max)

    def pure_branches(self) -> list[tuple[float, StateVector]]:
        """Exact convex decomposition into vacuum and two fringe eigenstates.

        The one-photon part diagonalizes as (|10> +- e^{-i phi} |01>)/sqrt(2)
        with weights (1 +- g)/2, so the window state is the mixture

            (1 - eps) |00> + eps (1+g)/2 psi_+ + eps (1-g)/2 psi_-.
        """
        phase = np.exp(-1j * self.phi)
        one_l = fock((1, 0), self.n_max)
        one_r = fock((0, 1), self.n_max)
        psi_plus = StateVector(
            (one_l.amplitudes + phase * one_r.amplitudes) / np.sqrt(2.0), 2, self.n_max
        )
        psi_minus = StateVector(
            (one_l.amplitudes - phase * one_r.amplitudes) / np.sqrt(2.0), 2, self.n_max
        )
        return [
            (1.0 - self.epsilon, fock((0, 0), self.n_max)),
            (self.epsilon * (1.0 + self.g) / 2.0, psi_plus),
            (self.epsilon * (1.0 - self.g) / 2.0, psi_minus),
        ]

    def sample_branch(self, rng=None) -> tuple[str, StateVector]:
        """Draw one window: ('vacuum'|'plus'|'minus', two-mode pure state)."""
        rng = np.random.default_rng(rng)
        branches = self.pure_branches()
        weights = np.array([w for w, _ in branches])
        idx = int(rng.choice(3, p=weights / weights.sum()))
        return ("vacuum", "plus", "minus")[idx], branches[idx][1]


def stellar_density(source: StellarSource) -> DensityOperator:
    """Full two-mode window state of ``source`` (vacuum plus one-photon block)."""
    return source.density_operator()


def single_photon_conditional(source: StellarSource, normalized: bool = True) -> np.ndarray:
    """One-photon 2x2 block of the window state, basis (|10>, |01>).

    With ``normalized=True`` (the default) this is the state conditioned on
    a photon having arrived, (1/2)[[1, nu*], [nu, 1]]; with
    ``normalized=False`` the raw block of the window state, i.e. the same
    matrix scaled by epsilon.
    """
    if source.epsilon == 0.0:
        raise ValueError("cannot condition on a photon arrival when epsilon = 0")
    block = source.conditional_matrix()
    return block if normalized else source.epsilon * block


def conditional_phi_derivative(phi: float, g: float) -> np.ndarray:
    """d/dphi of the conditional one-photon state, basis (|10>, |01>)."""
    e = np.exp(1j * phi)
    return 0.5 * g * np.array([[0.0, 1j * e], [-1j * np.conj(e), 0.0]])


def conditional_g_derivative(phi: float, g: float) -> np.ndarray:
    """d/dg of the conditional one-photon state, basis (|10>, |01>)."""
    e = np.exp(1j * phi)
    return 0.5 * np.array([[0.0, e], [np.conj(e), 0.0]])


# ---------------------------------------------------------------------------
# time-bin arrival model

NO_PHOTON = None


@dataclass(frozen=True)
class TimeBinConfig:
    """A collection window of ``n_bins`` short time bins of duration ``tau``.

    ``tau`` is bookkeeping only; nothing downstream depends on it.
    """

    n_bins: int
    tau: float = 1.0

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError(f"need at least one time bin, got {self.n_bins}")
        if self.tau <= 0.0:
            raise ValueError(f"bin duration must be positive, got {self.tau}")

    @property
    def total_duration(self) -> float:
        return self.n_bins * self.tau


def sample_arrival(config: TimeBinConfig, epsilon: float, rng=None):
    """Draw one collection window: ``None`` (no photon) or a bin in 1..N.

    ``epsilon`` is the per-bin arrival probability, so a photon arrives
    somewhere in the window with probability ``epsilon * n_bins`` and, when
    it does, lands in a uniformly random bin.  At most one photon per
    window by construction.
    """
    if epsilon < 0.0:
        raise ValueError(f"arrival probability must be nonnegative, got {epsilon}")
    p_window = epsilon * config.n_bins
    if p_window > 1.0:
        raise ValueError(
            f"epsilon * n_bins = {p_window} exceeds 1; the at-most-one-photon "
            "window model breaks down"
        )
    rng = np.random.default_rng(rng)
    if rng.random() >= p_window:
        return NO_PHOTON
    return int(rng.integers(1, config.n_bins + 1))
