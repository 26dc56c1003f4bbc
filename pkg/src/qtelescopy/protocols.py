"""Executable models of the interferometric measurement protocols.

Four measurement schemes over the same two-port stellar source:

* direct two-basis readout of the shared photon (one lab measures X, the
  other a delta-rotated basis);
* the Gottesman-style single-ancilla-photon baseline with tunable local
  optics, plus a numerical search over random passive local unitaries for
  its information ceiling;
* the six-mode entangled-ancilla protocol built from photon-number
  controlled gates, in two operationally equivalent wirings (a coherent
  CNOT sequence, or local parity readout with a fed-forward NOT), with
  heralding on the outer modes and an ancilla-loss error model;
* time-bin quantum-memory protocols that stamp the photon's arrival bin
  into Bell pairs, in the original (memory-qubit) and the halved-resource
  variants.

Every distribution here is produced by running the corresponding circuit
through the state engine; closed-form outcome tables live only in the test
oracles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericalInvariantError
from .gates import (
    MeasurementBasis,
    beam_splitter,
    cnot_fock,
    cz_fock,
    measure_in_basis,
    measurement_distribution,
    not_fock,
    parity_basis,
    phase_shift,
    project,
    rotated_basis,
    two_mode_unitary,
    x_basis,
)
from .sources import NO_PHOTON, StellarSource
from .state_engine import (
    StateVector,
    apply_unitary,
    fock,
    number_measurement_distribution,
    sample_and_collapse,
    tensor_at,
    vacuum,
)


class Herald(enum.Enum):
    PHOTON_ARRIVED = "photon_arrived"
    VACUUM = "vacuum"
    INVALID = "invalid"


class Variant(enum.Enum):
    """The two equivalent wirings of the entangled-ancilla protocol."""

    CNOT_SEQUENCE = "cnot_sequence"
    PARITY_FEED_FORWARD = "parity_feed_forward"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        text = str(value)
        # accept both snake_case and the CamelCase names used in configs
        aliases = {
            "cnotsequence": cls.CNOT_SEQUENCE,
            "cnot_sequence": cls.CNOT_SEQUENCE,
            "parityfeedforward": cls.PARITY_FEED_FORWARD,
            "parity_feed_forward": cls.PARITY_FEED_FORWARD,
        }
        key = text.replace("-", "_").lower().replace("__", "_")
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown protocol variant {value!r}")


@dataclass(frozen=True)
class ProtocolConfig:
    """Knobs of the entangled-ancilla protocol.

    ``delta`` is the tunable readout phase, ``eta`` the probability that
    the entangled ancilla pair is actually supplied for a window (the
    sole modeled error mechanism), and ``variant`` selects the wiring.
    """

    delta: float
    eta: float = 1.0
    variant: Variant = Variant.CNOT_SEQUENCE

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        object.__setattr__(self, "variant", Variant.parse(self.variant))


@dataclass(frozen=True)
class DetectionRecord:
    """One window's measurement record.

    ``counts`` holds per-mode photon numbers (count-based protocols);
    ``labels`` holds basis outcome labels (two-basis readout).  The herald
    says whether the outer-mode comparison flags a stellar photon.
    """

    herald: Herald
    counts: tuple | None = None
    labels: tuple | None = None


# six-mode register of the entangled-ancilla protocol
EXTRA_L, STAR_L, ANC_L, STAR_R, ANC_R, EXTRA_R = range(6)


def classify_herald(counts: Sequence[int]) -> Herald:
    """Herald rule: the outer modes agree iff the stellar photon arrived."""
    c0, c5 = counts[EXTRA_L], counts[EXTRA_R]
    if c0 not in (0, 1) or c5 not in (0, 1):
        return Herald.INVALID
    return Herald.PHOTON_ARRIVED if c0 == c5 else Herald.VACUUM


def _cnot_input_state(star: StateVector, ancilla_present: bool) -> StateVector:
    """Tensor the two-mode stellar state into the six-mode register.

    The outer modes always carry one photon each.  When the entangled
    ancilla is supplied, a single extra photon is shared coherently
    between the two inner ancilla modes; when it is lost those modes are
    left in vacuum.
    """
    n_max = star.n_max
    if ancilla_present:
        # factor modes ordered (EXTRA_L, ANC_L, ANC_R, EXTRA_R)
        left = fock((1, 1, 0, 1), n_max)
        right = fock((1, 0, 1, 1), n_max)
        anc = StateVector(
            (left.amplitudes + right.amplitudes) / np.sqrt(2.0), 4, n_max
        )
    else:
        anc = fock((1, 0, 0, 1), n_max)
    return tensor_at([(anc, (EXTRA_L, ANC_L, ANC_R, EXTRA_R)), (star, (STAR_L, STAR_R))])


def _cnot_gate_sequence(delta: float, n_max: int):
    """Coherent wiring: phase, photon-number CNOT chains, CZ, beam splitters."""
    return (
        phase_shift(ANC_L, delta, n_max),
        cnot_fock(STAR_L, EXTRA_L, n_max),
        cnot_fock(ANC_L, EXTRA_L, n_max),
        cnot_fock(EXTRA_L, ANC_L, n_max),
        cnot_fock(STAR_R, EXTRA_R, n_max),
        cnot_fock(ANC_R, EXTRA_R, n_max),
        cnot_fock(EXTRA_R, ANC_R, n_max),
        cz_fock(EXTRA_L, STAR_L, n_max),
        beam_splitter(STAR_L, ANC_L, n_max),
        beam_splitter(STAR_R, ANC_R, n_max),
    )


def _cnot_closing_gates(n_max: int):
    return (
        cz_fock(EXTRA_L, STAR_L, n_max),
        beam_splitter(STAR_L, ANC_L, n_max),
        beam_splitter(STAR_R, ANC_R, n_max),
    )


# feed-forward rule of the parity wiring: even local parity flips the
# ancilla mode, odd parity flips the outer mode
_FEED_FORWARD = {
    "L": {0: ANC_L, 1: EXTRA_L},
    "R": {0: ANC_R, 1: EXTRA_R},
}


def cnot_output_state(star: StateVector, ancilla_present: bool, config: ProtocolConfig) -> StateVector:
    """Pre-measurement six-mode state of the coherent wiring."""
    state = _cnot_input_state(star, ancilla_present)
    for gate in _cnot_gate_sequence(config.delta, star.n_max):
        state = apply_unitary(state, gate)
    return state


def _branch_distribution(star: StateVector, ancilla_present: bool, config: ProtocolConfig) -> dict:
    """Outcome table of one pure input branch, by explicit simulation."""
    n_max = star.n_max
    if config.variant is Variant.CNOT_SEQUENCE:
        out = cnot_output_state(star, ancilla_present, config)
        return number_measurement_distribution(out)

    # parity feed-forward wiring: measure each lab's (star, ancilla) parity,
    # apply the conditioned NOT, then close with the shared CZ and the
    # beam splitters
    state = apply_unitary(
        _cnot_input_state(star, ancilla_present), phase_shift(ANC_L, config.delta, n_max)
    )
    closing = _cnot_closing_gates(n_max)
    table: dict = {}
    basis_l = parity_basis(STAR_L, ANC_L, n_max)
    basis_r = parity_basis(STAR_R, ANC_R, n_max)
    for par_l in (0, 1):
        w_l, state_l = project(state, basis_l, par_l)
        if state_l is None:
            continue
        state_l = apply_unitary(state_l, not_fock(_FEED_FORWARD["L"][par_l], n_max))
        for par_r in (0, 1):
            w_r, state_r = project(state_l, basis_r, par_r)
            if state_r is None:
                continue
            state_r = apply_unitary(state_r, not_fock(_FEED_FORWARD["R"][par_r], n_max))
            for gate in closing:
                state_r = apply_unitary(state_r, gate)
            for label, p in number_measurement_distribution(state_r).items():
                table[label] = table.get(label, 0.0) + w_l * w_r * p
    return table


def cnot_branches(source: StellarSource, config: ProtocolConfig) -> list[tuple[str, bool, float, dict]]:
    """Per-branch outcome tables: (source branch, ancilla present, weight, table).

    The window state is an exact mixture of three pure source branches
    (vacuum and the two fringe eigenstates) crossed with the ancilla
    present/lost alternative; each combination is simulated separately.
    """
    if source.n_max < 2:
        raise ValueError("the six-mode circuit needs a photon-number cutoff of at least 2")
    names = ("vacuum", "plus", "minus")
    rows = []
    for name, (w_src, star) in zip(names, source.pure_branches()):
        for present, w_anc in ((True, config.eta), (False, 1.0 - config.eta)):
            weight = w_src * w_anc
            if weight == 0.0:
                continue
            rows.append((name, present, weight, _branch_distribution(star, present, config)))
    return rows


def cnot_distribution(source: StellarSource, config: ProtocolConfig) -> dict:
    """Window outcome distribution over six-mode count tuples."""
    merged: dict = {}
    for _, _, weight, table in cnot_branches(source, config):
        for label, p in table.items():
            merged[label] = merged.get(label, 0.0) + weight * p
    total = sum(merged.values())
    if abs(total - 1.0) > 1e-10:
        raise NumericalInvariantError(
            f"six-mode outcome probabilities sum to {total!r}; circuit wiring is leaking"
        )
    return merged


def run_cnot_window(source: StellarSource, config: ProtocolConfig, rng=None) -> DetectionRecord:
    """Simulate a single window end to end, including measurement collapse."""
    rng = np.random.default_rng(rng)
    _, star = source.sample_branch(rng)
    present = bool(rng.random() < config.eta)
    n_max = star.n_max
    if config.variant is Variant.CNOT_SEQUENCE:
        state = cnot_output_state(star, present, config)
    else:
        state = apply_unitary(
            _cnot_input_state(star, present), phase_shift(ANC_L, config.delta, n_max)
        )
        par_l, state = measure_in_basis(state, parity_basis(STAR_L, ANC_L, n_max), rng)
        state = apply_unitary(state, not_fock(_FEED_FORWARD["L"][par_l], n_max))
        par_r, state = measure_in_basis(state, parity_basis(STAR_R, ANC_R, n_max), rng)
        state = apply_unitary(state, not_fock(_FEED_FORWARD["R"][par_r], n_max))
        for gate in _cnot_closing_gates(n_max):
            state = apply_unitary(state, gate)
    counts, _ = sample_and_collapse(state, rng)
    return DetectionRecord(classify_herald(counts), counts=counts)


def sample_cnot_windows(
    source: StellarSource, config: ProtocolConfig, n_windows: int, rng=None
) -> list[tuple[str, bool, DetectionRecord]]:
    """Batch window sampler: (source branch, ancilla present, record) per window.

    Statistically identical to repeated :func:`run_cnot_window` (branch
    then outcome-given-branch), but the pure-branch circuits are simulated
    once and reused, which is what makes 1e5-window runs cheap.
    """
    rng = np.random.default_rng(rng)
    branches = cnot_branches(source, config)
    weights = np.array([w for _, _, w, _ in branches])
    picks = rng.choice(len(branches), size=n_windows, p=weights / weights.sum())
    pick_counts = np.bincount(picks, minlength=len(branches))
    slots: list[tuple[str, bool, DetectionRecord] | None] = [None] * n_windows
    positions_by_branch = [np.flatnonzero(picks == b) for b in range(len(branches))]
    for b, (name, present, _, table) in enumerate(branches):
        n_b = int(pick_counts[b])
        if n_b == 0:
            continue
        labels = list(table.keys())
        probs = np.array([table[lab] for lab in labels])
        outcome_ids = rng.choice(len(labels), size=n_b, p=probs / probs.sum())
        for pos, oid in zip(positions_by_branch[b], outcome_ids):
            counts = labels[oid]
            slots[pos] = (name, present, DetectionRecord(classify_herald(counts), counts=counts))
    return slots  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# direct two-basis readout


def _direct_bases(delta: float, n_max: int, swap_bases: bool) -> tuple[MeasurementBasis, MeasurementBasis]:
    if swap_bases:
        return rotated_basis(0, delta, n_max), x_basis(1, n_max)
    return x_basis(0, n_max), rotated_basis(1, delta, n_max)


def direct_distribution(
    source: StellarSource, delta: float, swap_bases: bool = False
) -> dict[tuple[int, int], float]:
    """Joint (left, right) outcome distribution of the direct readout.

    Conditioned on a photon arrival: the left lab measures its port in the
    X basis and the right lab in the delta-rotated basis (swappable).
    Outcomes are labeled by the +-1 eigenvalues, left first.
    """
    basis_l, basis_r = _direct_bases(delta, source.n_max, swap_bases)
    branches = source.pure_branches()[1:]  # the two single-photon fringe branches
    weight_sum = sum(w for w, _ in branches)
    table: dict[tuple[int, int], float] = {}
    for w, psi in branches:
        if w == 0.0:
            continue
        for left in (+1, -1):
            p_l, post = project(psi, basis_l, left)
            if post is None:
                continue
            for right in (+1, -1):
                p_r, _ = project(post, basis_r, right)
                key = (left, right)
                table[key] = table.get(key, 0.0) + (w / weight_sum) * p_l * p_r
    return table


def run_direct_window(
    source: StellarSource, delta: float, rng=None, swap_bases: bool = False
) -> tuple[int, int]:
    """Sample one conditioned direct-readout outcome pair."""
    rng = np.random.default_rng(rng)
    weights = np.array([(1.0 + source.g) / 2.0, (1.0 - source.g) / 2.0])
    psi = source.pure_branches()[1 + int(rng.choice(2, p=weights))][1]
    basis_l, basis_r = _direct_bases(delta, source.n_max, swap_bases)
    left, post = measure_in_basis(psi, basis_l, rng)
    right, _ = measure_in_basis(post, basis_r, rng)
    return left, right


# ---------------------------------------------------------------------------
# single-ancilla-photon baseline (four modes)

STAR_L4, ANC_L4, STAR_R4, ANC_R4 = range(4)


def gottesman_distribution(
    source: StellarSource,
    delta: float,
    u_left: np.ndarray | None = None,
    u_right: np.ndarray | None = None,
) -> dict:
    """Count distribution of the shared-single-photon baseline protocol.

    One ancilla photon is split coherently between the labs with a relative
    phase delta; each lab may apply an extra passive 2x2 unitary to its
    (star, ancilla) mode pair before the closing balanced beam splitter and
    photon counting.  ``u_left``/``u_right`` default to none, which is the
    plain protocol.
    """
    n_max = source.n_max
    if n_max < 2:
        raise ValueError("photon counting after the beam splitters needs a cutoff of at least 2")
    one = fock((1, 0), n_max)
    other = fock((0, 1), n_max)
    anc = StateVector(
        (one.amplitudes + np.exp(1j * delta) * other.amplitudes) / np.sqrt(2.0), 2, n_max
    )
    gates = []
    if u_left is not None:
        gates.append(two_mode_unitary(u_left, STAR_L4, ANC_L4, n_max, "u_left"))
    if u_right is not None:
        gates.append(two_mode_unitary(u_right, STAR_R4, ANC_R4, n_max, "u_right"))
    gates.append(beam_splitter(STAR_L4, ANC_L4, n_max))
    gates.append(beam_splitter(STAR_R4, ANC_R4, n_max))

    merged: dict = {}
    for weight, star in source.pure_branches():
        if weight == 0.0:
            continue
        state = tensor_at([(star, (STAR_L4, STAR_R4)), (anc, (ANC_L4, ANC_R4))])
        for gate in gates:
            state = apply_unitary(state, gate)
        for label, p in number_measurement_distribution(state).items():
            merged[label] = merged.get(label, 0.0) + weight * p
    total = sum(merged.values())
    if abs(total - 1.0) > 1e-10:
        raise NumericalInvariantError(
            f"four-mode outcome probabilities sum to {total!r}; circuit wiring is leaking"
        )
    return merged


def linear_bound_search(
    n_trials: int,
    rng_seed,
    epsilon: float = 0.1,
    delta: float = 0.3,
    phi: float = 0.7,
    n_max: int = 2,
) -> float:
    """Max phase Fisher information of the baseline over random local optics.

    Draws Haar-random passive 2x2 unitaries for both labs, evaluates the
    classical phase information of the resulting count distribution at
    g = 1, and returns the largest value found.
    """
    from scipy.stats import unitary_group

    from .fisher import OutcomeModel, classical_fisher
    from .state_engine import basis_labels

    if n_trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(rng_seed)
    all_labels = tuple(basis_labels(4, n_max))
    best = -np.inf
    for _ in range(n_trials):
        u_left = unitary_group.rvs(2, random_state=rng)
        u_right = unitary_group.rvs(2, random_state=rng)

        def distribution(phi_val: float, g_val: float, ul=u_left, ur=u_right) -> dict:
            src = StellarSource(phi_val, g_val, epsilon, n_max)
            return gottesman_distribution(src, delta, ul, ur)

        model = OutcomeModel(distribution, all_labels, units="per_window")
        info = classical_fisher(model, (phi, 1.0), wrt=("phi",)).phi_phi
        best = max(best, info)
    return float(best)


# ---------------------------------------------------------------------------
# time-bin memory protocols

BELL_PLUS = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
BELL_MINUS = np.array([1.0, 0.0, 0.0, -1.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class BellRegister:
    """Bell pairs split between the labs, one 4-vector per pair.

    Basis order per pair: |0_L 0_R>, |0_L 1_R>, |1_L 0_R>, |1_L 1_R>.
    """

    pairs: tuple[np.ndarray, ...]

    def __post_init__(self):
        frozen = []
        for vec in self.pairs:
            arr = np.array(vec, dtype=complex)
            if arr.shape != (4,):
                raise ValueError("each pair state must be a 4-vector")
            if abs(np.linalg.norm(arr) - 1.0) > 1e-10:
                raise ValueError("pair states must be normalized")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "pairs", tuple(frozen))

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


def pairs_for_bins(n_bins: int) -> int:
    """Number of Bell pairs needed to code bins 1..N plus the no-photon case.

    Equals ceil(log2(N + 1)), computed exactly as the bit length of N.
    """
    if n_bins < 1:
        raise ValueError(f"need at least one bin, got {n_bins}")
    return int(n_bins).bit_length()


def bell_register(n_pairs: int) -> BellRegister:
    if n_pairs < 1:
        raise ValueError("a register needs at least one pair")
    return BellRegister(tuple(BELL_PLUS.copy() for _ in range(n_pairs)))


def bin_digits(n: int, n_pairs: int) -> tuple[int, ...]:
    """Binary digits of ``n``, most significant first, padded to ``n_pairs``."""
    if not 0 <= n < 2**n_pairs:
        raise ValueError(f"bin {n} is not codable on {n_pairs} pairs")
    return tuple((n >> (n_pairs - 1 - i)) & 1 for i in range(n_pairs))


def encode_time_bin_modified(register: BellRegister, arrival) -> BellRegister:
    """Stamp an arrival bin into the register by phase-flipping digit-1 pairs.

    A photon in bin n applies Z to one half of pair i exactly when the i-th
    binary digit of n is 1, turning that pair's |Phi+> into |Phi->.  No
    photon leaves the register untouched.
    """
    if arrival is NO_PHOTON:
        return register
    n = int(arrival)
    if not 1 <= n < 2**register.n_pairs:
        raise ValueError(f"arrival bin {n} is out of range for {register.n_pairs} pairs")
    digits = bin_digits(n, register.n_pairs)
    flipper = np.array([1.0, 1.0, -1.0, -1.0])  # Z on the left half
    new_pairs = [
        pair * flipper if digit else pair for digit, pair in zip(digits, register.pairs)
    ]
    return BellRegister(tuple(new_pairs))


def _sample_pair_x_outcomes(pair: np.ndarray, rng) -> tuple[int, int]:
    """Joint X-basis outcomes (left, right) for one Bell pair 4-vector."""
    combos = [(+1, +1), (+1, -1), (-1, +1), (-1, -1)]
    probs = []
    for x_l, x_r in combos:
        amp = (pair[0] + x_r * pair[1] + x_l * pair[2] + x_l * x_r * pair[3]) / 2.0
        probs.append(abs(amp) ** 2)
    probs = np.array(probs)
    idx = int(rng.choice(4, p=probs / probs.sum()))
    return combos[idx]


def decode_time_bin(register: BellRegister, rng=None):
    """Read the stamped bin back out with local X measurements.

    Each pair is measured in the X basis in both labs; equal results mean
    the pair is still |Phi+> (digit 0), opposite results mean |Phi->
    (digit 1).  Returns the decoded bin, or ``None`` when every digit is 0.
    """
    rng = np.random.default_rng(rng)
    digits = []
    for pair in register.pairs:
        x_l, x_r = _sample_pair_x_outcomes(pair, rng)
        digits.append(0 if x_l == x_r else 1)
    n = 0
    for digit in digits:
        n = (n << 1) | digit
    return NO_PHOTON if n == 0 else n


@dataclass(frozen=True)
class MemoryRunResult:
    """Outcome of one memory-protocol window.

    ``decoded`` is the bin read back from the Bell pairs (None for no
    photon); ``outcome`` the final fringe measurement result (+1/-1 labels,
    a pair for the halved protocol's two-basis readout, a single value for
    the original protocol; None when no photon arrived); ``n_minus`` the
    number of -1 results among the X measurements that fix the fringe sign
    (original protocol only); ``final_distribution`` the exact conditional
    distribution the final outcome was drawn from, given every earlier
    sampled result.
    """

    decoded: object
    outcome: object
    n_minus: int | None
    final_distribution: dict | None


def _validate_arrival(n_bins: int, arrival) -> None:
    if n_bins < 1:
        raise ValueError(f"need at least one bin, got {n_bins}")
    if arrival is NO_PHOTON:
        return
    n = int(arrival)
    if not 1 <= n <= n_bins:
        raise ValueError(f"arrival bin {n} is outside 1..{n_bins}")


def run_memory_modified(
    n_bins: int,
    arrival,
    source: StellarSource,
    delta: float,
    rng_seed=None,
    swap_bases: bool = False,
) -> MemoryRunResult:
    """Halved-resource protocol: stamp, decode, then measure the photon directly.

    The arrival bin is stamped into ceil(log2(N+1)) Bell pairs and decoded
    by local X measurements; because either lab's phase flip produces the
    same |Phi-> state, the stellar photon is left untouched and its two
    ports are then measured exactly as in the direct readout.
    """
    _validate_arrival(n_bins, arrival)
    rng = np.random.default_rng(rng_seed)
    register = bell_register(pairs_for_bins(n_bins))
    register = encode_time_bin_modified(register, arrival)
    decoded = decode_time_bin(register, rng)
    if arrival is NO_PHOTON:
        return MemoryRunResult(decoded, None, None, None)
    outcome = run_direct_window(source, delta, rng, swap_bases)
    return MemoryRunResult(
        decoded, outcome, None, direct_distribution(source, delta, swap_bases)
    )


class _BranchEnsemble:
    """Parallel pure-state branches of a mixed register under shared outcomes.

    The window state is a two-branch mixture (the fringe eigenstates of the
    source).  Each measurement is sampled from the mixture distribution,
    then every branch is collapsed on the common outcome and its weight is
    updated by Bayes' rule, so later conditional distributions are exact.
    """

    def __init__(self, branches: list[tuple[float, StateVector]], rng):
        self.branches = branches
        self.rng = rng

    def distribution(self, basis: MeasurementBasis) -> np.ndarray:
        mixed = None
        for weight, state in self.branches:
            probs = weight * measurement_distribution(state, basis)
            mixed = probs if mixed is None else mixed + probs
        return mixed

    def measure(self, basis: MeasurementBasis):
        mixed = self.distribution(basis)
        total = mixed.sum()
        idx = int(self.rng.choice(len(mixed), p=mixed / total))
        outcome = basis.outcomes[idx]
        updated = []
        for weight, state in self.branches:
            p_branch, post = project(state, basis, outcome)
            if post is not None:
                updated.append((weight * p_branch, post))
        norm = sum(w for w, _ in updated)
        self.branches = [(w / norm, s) for w, s in updated]
        return outcome


def run_memory_unmodified(
    n_bins: int,
    arrival,
    source: StellarSource,
    delta: float,
    rng_seed=None,
    swap_bases: bool = False,
) -> MemoryRunResult:
    """Original memory protocol, simulated on the full qubit register.

    Each lab holds one memory qubit per Bell pair.  The incoming photon
    (coherently shared between the labs' star modes) writes its bin's
    binary digits into the memory qubits via photon-controlled NOTs; CZ
    gates transfer the digits onto the Bell pairs, which are decoded by
    local X measurements.  The star modes and all written memory qubits
    except one are then measured in X; the number of -1 results, n_minus,
    fixes the fringe sign of the last qubit, which is read in the
    delta-rotated basis.
    """
    _validate_arrival(n_bins, arrival)
    rng = np.random.default_rng(rng_seed)
    n_pairs = pairs_for_bins(n_bins)

    if arrival is NO_PHOTON:
        # every controlled gate is vacuum-controlled identity: the pairs
        # stay |Phi+> and decode to the no-photon code word
        decoded = decode_time_bin(bell_register(n_pairs), rng)
        return MemoryRunResult(decoded, None, 0, None)

    digits = bin_digits(int(arrival), n_pairs)
    affected = [i for i, d in enumerate(digits) if d == 1]
    last = affected[-1]

    # mode layout: stars, then per-lab memory qubits, then pair qubits
    n_max = 1
    star_l, star_r = 0, 1
    mem_l = [2 + i for i in range(n_pairs)]
    mem_r = [2 + n_pairs + i for i in range(n_pairs)]
    pair_l = [2 + 2 * n_pairs + 2 * i for i in range(n_pairs)]
    pair_r = [3 + 2 * n_pairs + 2 * i for i in range(n_pairs)]
    mode_count = 2 + 4 * n_pairs

    pair_state = StateVector(
        (fock((0, 0), n_max).amplitudes + fock((1, 1), n_max).amplitudes) / np.sqrt(2.0),
        2,
        n_max,
    )

    branches = []
    for sign, weight in ((+1.0, (1.0 + source.g) / 2.0), (-1.0, (1.0 - source.g) / 2.0)):
        if weight == 0.0:
            continue
        phase = sign * np.exp(-1j * source.phi)
        star = StateVector(
            (fock((1, 0), n_max).amplitudes + phase * fock((0, 1), n_max).amplitudes)
            / np.sqrt(2.0),
            2,
            n_max,
        )
        factors = [(star, (star_l, star_r))]
        factors += [(pair_state, (pair_l[i], pair_r[i])) for i in range(n_pairs)]
        factors += [(vacuum(2 * n_pairs, n_max), tuple(mem_l + mem_r))]
        state = tensor_at(factors)
        for i in affected:
            state = apply_unitary(state, cnot_fock(star_l, mem_l[i], n_max))
            state = apply_unitary(state, cnot_fock(star_r, mem_r[i], n_max))
        for i in range(n_pairs):
            state = apply_unitary(state, cz_fock(mem_l[i], pair_l[i], n_max))
            state = apply_unitary(state, cz_fock(mem_r[i], pair_r[i], n_max))
        branches.append((weight, state))

    ensemble = _BranchEnsemble(branches, rng)

    decoded_digits = []
    for i in range(n_pairs):
        x_l = ensemble.measure(x_basis(pair_l[i], n_max))
        x_r = ensemble.measure(x_basis(pair_r[i], n_max))
        decoded_digits.append(0 if x_l == x_r else 1)
    decoded = 0
    for digit in decoded_digits:
        decoded = (decoded << 1) | digit
    decoded = NO_PHOTON if decoded == 0 else decoded

    final_mode = mem_l[last] if swap_bases else mem_r[last]
    x_modes = [star_l, star_r]
    x_modes += [mem_l[i] for i in affected if mem_l[i] != final_mode]
    x_modes += [mem_r[i] for i in affected if mem_r[i] != final_mode]

    n_minus = 0
    for mode in x_modes:
        if ensemble.measure(x_basis(mode, n_max)) == -1:
            n_minus += 1

    final_basis = rotated_basis(final_mode, delta, n_max)
    mixed = ensemble.distribution(final_basis)
    final_distribution = {
        outcome: float(p) for outcome, p in zip(final_basis.outcomes, mixed / mixed.sum())
    }
    outcome = ensemble.measure(final_basis)
    return MemoryRunResult(decoded, outcome, n_minus, final_distribution)


@dataclass(frozen=True)
class MemoryResources:
    """Ancilla budget of one memory-protocol window."""

    n_pairs: int
    bell_qubits: int
    memory_qubits: int
    encode_gates_per_lab: int

    @property
    def total_ancilla_qubits(self) -> int:
        return self.bell_qubits + self.memory_qubits


def memory_resources(n_bins: int, modified: bool) -> MemoryResources:
    """Per-window ancilla counts; the halved protocol drops the memory layer.

    The original protocol needs, per lab, one controlled-NOT slot onto each
    memory qubit and one CZ per pair (2 * n_pairs gate slots); the halved
    protocol needs only the phase-flip slot per pair (n_pairs).
    """
    n_pairs = pairs_for_bins(n_bins)
    if modified:
        return MemoryResources(n_pairs, 2 * n_pairs, 0, n_pairs)
    return MemoryResources(n_pairs, 2 * n_pairs, 2 * n_pairs, 2 * n_pairs)
