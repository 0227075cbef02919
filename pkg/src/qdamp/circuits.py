"""Seeded random H/T/CNOT circuits and paired noiseless/noisy evolution.

Each layer draws one gate: kind uniform over {H, T, CNOT}, then a uniform
target qubit (H, T) or a uniform ordered pair of distinct qubits (CNOT).
The noisy pipeline applies the gate and then amplitude damping to every
qubit the gate did not touch ("idle" qubits); gates themselves are perfect.
An `all_qubits` placement is available for sensitivity studies but is not
the default.

All randomness flows from explicit 64-bit seeds.  Per-sample seeds are
derived from a master seed by a counter split through a fixed 64-bit mixing
function, so ensemble members are independent of evaluation order and can
be simulated on any number of workers without changing the results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import states
from .errors import DimensionMismatchError, TooFewQubitsError
from .states import (
    DensityMatrix,
    Gate,
    PureState,
    _apply_gate_array,
    initial_state,
)

_MASK64 = (1 << 64) - 1

# Stream tags for seed derivation: circuit samples and the Haar reference
# draw from disjoint streams of the same master seed.
STREAM_SAMPLES = 0
STREAM_HAAR = 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deterministic 64-bit seed for a substream of a master seed.

    Successive indices are folded in through splitmix64, so
    derive_seed(s, 0, k) for k = 0, 1, ... yields a counter-based family of
    well-separated seeds.
    """
    s = master_seed & _MASK64
    for i in indices:
        s = _splitmix64(s ^ _splitmix64(i & _MASK64))
    return s


@dataclass(frozen=True)
class LayerEvent:
    """One drawn gate together with its position in the circuit."""

    gate: Gate
    layer_index: int


@dataclass(frozen=True)
class CircuitRealization:
    """A fully drawn circuit: (seed, n, depth) reproduces `events` exactly."""

    n: int
    depth: int
    seed: int
    events: tuple[LayerEvent, ...]

    def __post_init__(self):
        if len(self.events) != self.depth:
            raise ValueError(
                f"realization has {len(self.events)} events for depth {self.depth}"
            )


@dataclass(frozen=True)
class NoiseSpec:
    """Damping strength and placement rule for the noisy pipeline."""

    gamma: float
    placement: str = "idle_only"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.placement not in ("idle_only", "all_qubits"):
            raise ValueError(
                f"placement must be 'idle_only' or 'all_qubits', got {self.placement!r}"
            )


def sample_realization(seed: int, n: int, depth: int) -> CircuitRealization:
    """Draw a circuit of `depth` layers; deterministic in (seed, n, depth)."""
    if n < 2:
        raise TooFewQubitsError(f"need n >= 2 to draw CNOT pairs, got n={n}")
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    rng = np.random.Generator(np.random.PCG64(seed & _MASK64))
    events = []
    for layer in range(depth):
        kind = int(rng.integers(0, 3))
        if kind == 0:
            gate = Gate("H", (int(rng.integers(0, n)),))
        elif kind == 1:
            gate = Gate("T", (int(rng.integers(0, n)),))
        else:
            control = int(rng.integers(0, n))
            target = int(rng.integers(0, n - 1))
            if target >= control:
                target += 1
            gate = Gate("CNOT", (control, target))
        events.append(LayerEvent(gate, layer))
    return CircuitRealization(n, depth, seed & _MASK64, tuple(events))


def idle_qubits(gate: Gate, n: int) -> tuple[int, ...]:
    """Qubits the gate does not act on, in ascending order."""
    busy = set(gate.qubits)
    return tuple(q for q in range(n) if q not in busy)


def _noise_targets(gate: Gate, n: int, placement: str) -> tuple[int, ...]:
    if placement == "all_qubits":
        return tuple(range(n))
    return idle_qubits(gate, n)


def _normalize_record_depths(depth: int, record_at) -> list[int]:
    if record_at is None:
        return list(range(1, depth + 1))
    depths = sorted({int(t) for t in record_at})
    if depths and (depths[0] < 0 or depths[-1] > depth):
        raise ValueError(f"recorded depths must lie in [0, {depth}], got {depths}")
    return depths


def evolve_unitary(
    init: PureState, circuit: CircuitRealization, record_at=None
) -> list[tuple[int, PureState]]:
    """Run the circuit on a pure state, returning (depth, state) snapshots.

    Depth t means "after the first t layers"; recording depth 0 snapshots
    the initial state.  By default every depth from 1 to the full depth is
    recorded.
    """
    if init.n != circuit.n:
        raise DimensionMismatchError(
            f"state has n={init.n} but circuit has n={circuit.n}"
        )
    depths = _normalize_record_depths(circuit.depth, record_at)
    wanted = set(depths)
    psi = init.amplitudes.copy()
    snaps: dict[int, PureState] = {}
    if 0 in wanted:
        snaps[0] = PureState._wrap(init.n, psi.copy())
    for event in circuit.events:
        _apply_gate_array(psi, circuit.n, event.gate, density=False)
        t = event.layer_index + 1
        if t in wanted:
            snaps[t] = PureState._wrap(init.n, psi.copy())
    return [(t, snaps[t]) for t in depths]


def evolve_noisy(
    init: DensityMatrix,
    circuit: CircuitRealization,
    noise: NoiseSpec,
    record_at=None,
) -> list[tuple[int, DensityMatrix]]:
    """Run the circuit with per-layer damping, returning (depth, state) snapshots.

    Each layer applies the gate and then the damping channel to its noise
    targets (idle qubits by default), in ascending qubit order.
    """
    if init.n != circuit.n:
        raise DimensionMismatchError(
            f"state has n={init.n} but circuit has n={circuit.n}"
        )
    depths = _normalize_record_depths(circuit.depth, record_at)
    wanted = set(depths)
    rho = init.matrix.copy()
    snaps: dict[int, DensityMatrix] = {}
    if 0 in wanted:
        snaps[0] = DensityMatrix._wrap(init.n, rho.copy())
    for event in circuit.events:
        _apply_gate_array(rho, circuit.n, event.gate, density=True)
        for q in _noise_targets(event.gate, circuit.n, noise.placement):
            states._ad_density(rho, circuit.n, q, noise.gamma)
        t = event.layer_index + 1
        if t in wanted:
            snaps[t] = DensityMatrix._wrap(init.n, rho.copy())
    return [(t, snaps[t]) for t in depths]


def _clamped_probs(p: np.ndarray) -> np.ndarray:
    if float(p.min()) < -1e-12:
        raise ValueError(f"diagonal entry {p.min()} too negative to be a probability")
    return np.clip(p, 0.0, None)


def unitary_prob_trajectory(
    init: PureState, circuit: CircuitRealization, depths: list[int]
) -> np.ndarray:
    """Measurement probabilities at the given depths, shape (len(depths), d).

    Walks the evolution once without materializing state snapshots; rows
    follow the order of `depths`.
    """
    if init.n != circuit.n:
        raise DimensionMismatchError(
            f"state has n={init.n} but circuit has n={circuit.n}"
        )
    row_of = {t: r for r, t in enumerate(depths)}
    out = np.empty((len(depths), init.d))
    psi = init.amplitudes.copy()
    if 0 in row_of:
        out[row_of[0]] = psi.real**2 + psi.imag**2
    for event in circuit.events:
        _apply_gate_array(psi, circuit.n, event.gate, density=False)
        row = row_of.get(event.layer_index + 1)
        if row is not None:
            out[row] = psi.real**2 + psi.imag**2
    return out


def noisy_prob_trajectory(
    init: DensityMatrix,
    circuit: CircuitRealization,
    noise: NoiseSpec,
    depths: list[int],
) -> np.ndarray:
    """Diagonal probabilities of the noisy evolution at the given depths."""
    if init.n != circuit.n:
        raise DimensionMismatchError(
            f"state has n={init.n} but circuit has n={circuit.n}"
        )
    row_of = {t: r for r, t in enumerate(depths)}
    out = np.empty((len(depths), init.d))
    rho = init.matrix.copy()
    if 0 in row_of:
        out[row_of[0]] = _clamped_probs(np.real(np.diagonal(rho)))
    for event in circuit.events:
        _apply_gate_array(rho, circuit.n, event.gate, density=True)
        for q in _noise_targets(event.gate, circuit.n, noise.placement):
            states._ad_density(rho, circuit.n, q, noise.gamma)
        row = row_of.get(event.layer_index + 1)
        if row is not None:
            out[row] = _clamped_probs(np.real(np.diagonal(rho)))
    return out


@dataclass
class PairedSample:
    """One ensemble member: the same drawn circuit run without and with noise."""

    index: int
    realization: CircuitRealization
    depths: list[int]
    unitary_probs: np.ndarray
    noisy_probs: np.ndarray


def paired_ensemble(
    master_seed: int,
    n: int,
    depth: int,
    m: int,
    noise: NoiseSpec,
    init: str = "zeros",
    record_at=None,
) -> Iterator[PairedSample]:
    """Stream paired noiseless/noisy probability trajectories.

    Sample k uses the circuit drawn from derive_seed(master_seed, 0, k) for
    both pipelines, which removes the circuit-sampling variance from their
    comparison.
    """
    if m < 1:
        raise ValueError(f"ensemble size must be at least 1, got {m}")
    depths = _normalize_record_depths(depth, record_at)
    pure0 = initial_state(n, init, "pure")
    dens0 = initial_state(n, init, "density")
    for k in range(m):
        circuit = sample_realization(derive_seed(master_seed, STREAM_SAMPLES, k), n, depth)
        yield PairedSample(
            index=k,
            realization=circuit,
            depths=depths,
            unitary_probs=unitary_prob_trajectory(pure0, circuit, depths),
            noisy_probs=noisy_prob_trajectory(dens0, circuit, noise, depths),
        )
