"""Truncated multimode Fock-space states and exact linear evolution.

A register of ``mode_count`` optical modes with per-mode photon cutoff
``n_max`` lives in a dense Hilbert space of dimension
``(n_max + 1) ** mode_count``.  Basis labels are enumerated in row-major
order with mode 0 as the most significant digit: the flat index of the
occupation tuple ``(n_0, ..., n_{M-1})`` is
``sum(n_m * (n_max + 1) ** (M - 1 - m))``, which is exactly the order
produced by :func:`numpy.ndindex`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CutoffError, InvalidSubspaceError, LeakageError

AMPLITUDE_DUMP_CUTOFF = 1e-14
NORM_ATOL = 1e-10


# ---------------------------------------------------------------------------
# basis bookkeeping


def space_dim(mode_count: int, n_max: int) -> int:
    return (n_max + 1) ** mode_count


def basis_index(occupations: Sequence[int], n_max: int) -> int:
    """Flat index of an occupation tuple (mode 0 most significant)."""
    idx = 0
    for n in occupations:
        if not 0 <= n <= n_max:
            raise CutoffError(
                f"occupation {n} outside [0, {n_max}] in label {tuple(occupations)}"
            )
        idx = idx * (n_max + 1) + int(n)
    return idx


def basis_label(index: int, mode_count: int, n_max: int) -> tuple[int, ...]:
    """Occupation tuple for a flat basis index."""
    d = n_max + 1
    digits = []
    for _ in range(mode_count):
        digits.append(index % d)
        index //= d
    return tuple(reversed(digits))


@lru_cache(maxsize=None)
def labels_array(mode_count: int, n_max: int) -> np.ndarray:
    """All occupation labels as a read-only ``(dim, mode_count)`` int array."""
    d = n_max + 1
    grids = np.indices((d,) * mode_count).reshape(mode_count, -1).T
    grids = np.ascontiguousarray(grids)
    grids.setflags(write=False)
    return grids


def basis_labels(mode_count: int, n_max: int) -> list[tuple[int, ...]]:
    return [tuple(int(n) for n in row) for row in labels_array(mode_count, n_max)]


# ---------------------------------------------------------------------------
# state containers


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state over the truncated Fock register."""

    amplitudes: np.ndarray
    mode_count: int
    n_max: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (space_dim(self.mode_count, self.n_max),):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected "
                f"({space_dim(self.mode_count, self.n_max)},)"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.mode_count, self.n_max)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def tensor(self, other: "StateVector") -> "StateVector":
        if other.n_max != self.n_max:
            raise ValueError("tensor factors must share the same cutoff")
        return StateVector(
            np.kron(self.amplitudes, other.amplitudes),
            self.mode_count + other.mode_count,
            self.n_max,
        )

    def to_density(self) -> "DensityOperator":
        return DensityOperator(
            np.outer(self.amplitudes, self.amplitudes.conj()),
            self.mode_count,
            self.n_max,
        )


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Mixed state over the truncated Fock register."""

    matrix: np.ndarray
    mode_count: int
    n_max: int

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = space_dim(self.mode_count, self.n_max)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix has shape {mat.shape}, expected ({dim}, {dim})")
        object.__setattr__(self, "matrix", mat)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diagonal(self.matrix)), 0.0, None)

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        if other.n_max != self.n_max:
            raise ValueError("tensor factors must share the same cutoff")
        return DensityOperator(
            np.kron(self.matrix, other.matrix),
            self.mode_count + other.mode_count,
            self.n_max,
        )

    @staticmethod
    def mixture(pairs: Iterable[tuple[float, "DensityOperator"]]) -> "DensityOperator":
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty mixture")
        first = pairs[0][1]
        mat = sum(w * rho.matrix for w, rho in pairs)
        return DensityOperator(mat, first.mode_count, first.n_max)


def vacuum(mode_count: int, n_max: int) -> StateVector:
    amps = np.zeros(space_dim(mode_count, n_max), dtype=complex)
    amps[0] = 1.0
    return StateVector(amps, mode_count, n_max)


def fock(occupations: Sequence[int], n_max: int) -> StateVector:
    """Product Fock state |n_0, n_1, ..., n_{M-1}>."""
    occupations = tuple(int(n) for n in occupations)
    amps = np.zeros(space_dim(len(occupations), n_max), dtype=complex)
    amps[basis_index(occupations, n_max)] = 1.0
    return StateVector(amps, len(occupations), n_max)


def basis_state(occupations: Sequence[int], mode_count: int, n_max: int) -> StateVector:
    """Unit vector on one occupation label of a ``mode_count``-mode register."""
    occupations = tuple(int(n) for n in occupations)
    if len(occupations) != mode_count:
        raise ValueError(
            f"label {occupations} has {len(occupations)} entries for {mode_count} modes"
        )
    return fock(occupations, n_max)


def arrange_modes(state: StateVector, current: Sequence[int]) -> StateVector:
    """Reorder tensor factors so factor ``i`` becomes register mode ``current[i]``."""
    current = tuple(int(m) for m in current)
    if sorted(current) != list(range(state.mode_count)):
        raise ValueError(f"{current} is not a permutation of the register modes")
    d = state.n_max + 1
    t = state.amplitudes.reshape((d,) * state.mode_count)
    t = np.moveaxis(t, range(state.mode_count), current)
    return StateVector(t.reshape(-1), state.mode_count, state.n_max)


def tensor_at(factors: Sequence[tuple[StateVector, Sequence[int]]]) -> StateVector:
    """Compose disjoint factors placed at explicit register modes.

    ``factors`` is a sequence of ``(state, modes)`` pairs whose mode lists
    together partition the register.
    """
    joined = None
    positions: list[int] = []
    for state, modes in factors:
        modes = tuple(int(m) for m in modes)
        if len(modes) != state.mode_count:
            raise ValueError("factor mode list does not match its mode count")
        joined = state if joined is None else joined.tensor(state)
        positions.extend(modes)
    if joined is None:
        raise ValueError("no factors given")
    return arrange_modes(joined, positions)


# ---------------------------------------------------------------------------
# local unitaries


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    """Unitary block acting on an ordered subset of modes.

    ``matrix`` has shape ``(d**k, d**k)`` with ``d = n_max + 1`` and ``k``
    the number of target modes; its tensor factors follow ``target_modes``
    order.  ``valid_mask`` flags the local input labels on which the block
    is defined; columns for invalid labels must be zero.  States carrying
    more than ``NORM_ATOL`` probability on invalid labels are rejected.
    """

    target_modes: tuple[int, ...]
    matrix: np.ndarray
    n_max: int
    valid_mask: np.ndarray = field(default=None)  # type: ignore[assignment]
    name: str = ""

    def __post_init__(self):
        targets = tuple(int(m) for m in self.target_modes)
        if len(set(targets)) != len(targets):
            raise ValueError(f"repeated target modes {targets}")
        mat = np.asarray(self.matrix, dtype=complex)
        dloc = space_dim(len(targets), self.n_max)
        if mat.shape != (dloc, dloc):
            raise ValueError(f"matrix shape {mat.shape} does not match {len(targets)} modes")
        mask = self.valid_mask
        if mask is None:
            mask = np.ones(dloc, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (dloc,):
                raise ValueError("valid_mask length does not match the local dimension")
        object.__setattr__(self, "target_modes", targets)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "valid_mask", mask)

    @property
    def is_identity(self) -> bool:
        return bool(self.valid_mask.all()) and np.array_equal(
            self.matrix, np.eye(self.matrix.shape[0])
        )

    def invalid_labels(self) -> list[tuple[int, ...]]:
        labs = labels_array(len(self.target_modes), self.n_max)
        return [tuple(row) for row in labs[~self.valid_mask]]


def _move_front(stack: np.ndarray, gate: ModeUnitary, mode_count: int) -> np.ndarray:
    """View a ``(dim, batch)`` stack as ``(d**k, rest)`` with targets leading."""
    d = gate.n_max + 1
    k = len(gate.target_modes)
    t = stack.reshape((d,) * mode_count + (-1,))
    t = np.moveaxis(t, gate.target_modes, range(k))
    return t.reshape(d**k, -1), t.shape[k:]


def _apply_stack(gate: ModeUnitary, stack: np.ndarray, mode_count: int) -> np.ndarray:
    """Apply ``gate`` along the state index of a ``(dim, batch)`` stack."""
    d = gate.n_max + 1
    k = len(gate.target_modes)
    block, rest_shape = _move_front(stack, gate, mode_count)
    out = gate.matrix @ block
    t = out.reshape((d,) * k + rest_shape)
    t = np.moveaxis(t, range(k), gate.target_modes)
    return t.reshape(stack.shape)


def _invalid_mass(gate: ModeUnitary, probabilities: np.ndarray, mode_count: int) -> float:
    if gate.valid_mask.all():
        return 0.0
    block, _ = _move_front(probabilities.reshape(-1, 1), gate, mode_count)
    return float(np.sum(block[~gate.valid_mask]))


def apply_unitary(state, gate: ModeUnitary, *, atol: float = NORM_ATOL):
    """Apply a local unitary to a :class:`StateVector` or :class:`DensityOperator`.

    Raises :class:`InvalidSubspaceError` if the input carries probability
    above ``atol`` on labels where the gate is undefined, and
    :class:`LeakageError` if the application loses norm (weight pushed
    past the cutoff).  Exact identities are returned unchanged.
    """
    if gate.n_max != state.n_max:
        raise ValueError("gate and state cutoffs differ")
    if any(not 0 <= m < state.mode_count for m in gate.target_modes):
        raise ValueError(
            f"target modes {gate.target_modes} out of range for {state.mode_count} modes"
        )
    if gate.is_identity:
        return state

    mass = _invalid_mass(gate, state.probabilities(), state.mode_count)
    if mass > atol:
        raise InvalidSubspaceError(
            f"{gate.name or 'gate'} on modes {gate.target_modes} is undefined for "
            f"labels {gate.invalid_labels()}; input carries probability {mass:.3e} there"
        )

    if isinstance(state, StateVector):
        before = float(np.sum(state.probabilities()))
        new = _apply_stack(gate, state.amplitudes.reshape(-1, 1), state.mode_count)
        new = new.reshape(-1)
        after = float(np.sum(np.abs(new) ** 2))
        if before - after > atol:
            raise LeakageError(
                f"{gate.name or 'gate'} on modes {gate.target_modes} lost norm "
                f"{before - after:.3e} past the cutoff n_max={state.n_max}"
            )
        return StateVector(new, state.mode_count, state.n_max)

    if isinstance(state, DensityOperator):
        before = float(np.real(state.trace()))
        half = _apply_stack(gate, state.matrix, state.mode_count)
        full = _apply_stack(gate, half.conj().T.copy(), state.mode_count).conj().T
        after = float(np.real(np.trace(full)))
        if before - after > atol:
            raise LeakageError(
                f"{gate.name or 'gate'} on modes {gate.target_modes} lost trace "
                f"{before - after:.3e} past the cutoff n_max={state.n_max}"
            )
        return DensityOperator(full, state.mode_count, state.n_max)

    raise TypeError(f"unsupported state type {type(state).__name__}")


def expand_unitary(gate: ModeUnitary, mode_count: int) -> np.ndarray:
    """Dense matrix of a local gate on the full register."""
    dim = space_dim(mode_count, gate.n_max)
    return _apply_stack(gate, np.eye(dim, dtype=complex), mode_count)


# ---------------------------------------------------------------------------
# measurement and reduction


def number_distribution(state) -> np.ndarray:
    """Probabilities of all photon-number outcomes, indexed like the basis."""
    return state.probabilities()


def number_measurement_distribution(
    state, modes: Sequence[int] | None = None
) -> dict[tuple[int, ...], float]:
    """Marginal photon-number distribution on ``modes`` (default: all modes).

    Returns a map from occupation tuples (in the order of ``modes``) to
    probabilities; exact zeros are omitted.
    """
    d = state.n_max + 1
    if modes is None:
        modes = tuple(range(state.mode_count))
    else:
        modes = tuple(int(m) for m in modes)
    if not modes:
        raise ValueError("at least one mode must be measured")
    if len(set(modes)) != len(modes):
        raise ValueError(f"repeated modes in {modes}")
    k = len(modes)
    t = state.probabilities().reshape((d,) * state.mode_count)
    t = np.moveaxis(t, modes, range(k))
    marginal = t.reshape(d**k, -1).sum(axis=1)
    labs = basis_labels(k, state.n_max)
    return {lab: float(p) for lab, p in zip(labs, marginal) if p > 0.0}


def mode_occupations(state) -> np.ndarray:
    """Mean photon number of every mode."""
    labs = labels_array(state.mode_count, state.n_max)
    return state.probabilities() @ labs


def sample_and_collapse(state: StateVector, rng=None, modes: Sequence[int] | None = None):
    """Measure photon number on ``modes`` (default: all) and collapse.

    Returns ``(outcome, post_state)`` where ``outcome`` is the occupation
    tuple of the measured modes in the order given and ``post_state`` keeps
    the full register with the measured modes pinned to the outcome.
    ``rng`` may be a seed or a :class:`numpy.random.Generator`.
    """
    if not isinstance(state, StateVector):
        raise TypeError("sampling requires a StateVector; mix over branches instead")
    rng = np.random.default_rng(rng)
    d = state.n_max + 1
    if modes is None:
        modes = tuple(range(state.mode_count))
    else:
        modes = tuple(int(m) for m in modes)
    k = len(modes)

    t = state.amplitudes.reshape((d,) * state.mode_count)
    t = np.moveaxis(t, modes, range(k))
    rest_shape = t.shape[k:]
    block = t.reshape(d**k, -1)
    marginal = np.sum(np.abs(block) ** 2, axis=1)
    total = marginal.sum()
    if not np.isclose(total, 1.0, atol=1e-9):
        raise ValueError(f"state is not normalized (norm^2 = {total})")
    idx = int(rng.choice(d**k, p=marginal / total))
    outcome = basis_label(idx, k, state.n_max)

    collapsed = np.zeros_like(block)
    collapsed[idx] = block[idx] / np.sqrt(marginal[idx])
    t = collapsed.reshape((d,) * k + rest_shape)
    t = np.moveaxis(t, range(k), modes)
    post = StateVector(t.reshape(-1), state.mode_count, state.n_max)
    return outcome, post


def partial_trace(state, keep: Sequence[int]) -> DensityOperator:
    """Reduced density operator on ``keep`` (output modes follow that order)."""
    keep = tuple(int(m) for m in keep)
    if len(set(keep)) != len(keep):
        raise ValueError(f"repeated modes in {keep}")
    d = state.n_max + 1
    M = state.mode_count

    if isinstance(state, StateVector):
        t = state.amplitudes.reshape((d,) * M)
        t = np.moveaxis(t, keep, range(len(keep)))
        block = t.reshape(d ** len(keep), -1)
        return DensityOperator(block @ block.conj().T, len(keep), state.n_max)

    if isinstance(state, DensityOperator):
        t = state.matrix.reshape((d,) * (2 * M))
        row = list(range(M))
        col = [M + i if i in keep else i for i in range(M)]
        out = [row[m] for m in keep] + [col[m] for m in keep]
        reduced = np.einsum(t, row + col, out)
        dk = d ** len(keep)
        return DensityOperator(reduced.reshape(dk, dk), len(keep), state.n_max)

    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# plain-text serialization


def dump_state(state: StateVector) -> str:
    """Serialize to text: header ``mode_count n_max``, then one nonzero
    amplitude per line as ``n_0 ... n_{M-1} re im`` with full precision."""
    lines = [f"{state.mode_count} {state.n_max}"]
    labs = labels_array(state.mode_count, state.n_max)
    for label, amp in zip(labs, state.amplitudes):
        if abs(amp) > AMPLITUDE_DUMP_CUTOFF:
            occ = " ".join(str(int(n)) for n in label)
            lines.append(f"{occ} {float(amp.real)!r} {float(amp.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> StateVector:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty state dump")
    head = rows[0].split()
    if len(head) != 2:
        raise ValueError(f"malformed header {rows[0]!r}")
    mode_count, n_max = int(head[0]), int(head[1])
    amps = np.zeros(space_dim(mode_count, n_max), dtype=complex)
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != mode_count + 2:
            raise ValueError(f"malformed amplitude line {line!r}")
        label = [int(p) for p in parts[:mode_count]]
        amps[basis_index(label, n_max)] = complex(float(parts[-2]), float(parts[-1]))
    return StateVector(amps, mode_count, n_max)


def save_state(state: StateVector, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dump_state(state))


def load_state(path) -> StateVector:
    with open(path, "r", encoding="ascii") as fh:
        return parse_state(fh.read())
