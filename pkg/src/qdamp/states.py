"""Dense n-qubit state vectors, density matrices, the H/T/CNOT gate set and
the amplitude-damping channel.

Qubit 0 is the most significant bit of the computational basis index, so for
n qubits the basis state |q0 q1 ... q_{n-1}> sits at index
q0 * 2^(n-1) + ... + q_{n-1}.  Registers are stored dense (the target scale
is n <= 7).  Single-qubit gates and channels act through reshaped views of
the underlying array, touching O(d) amplitudes or O(d^2) matrix entries
without ever forming a d x d unitary or superoperator.

States are value containers: the public operations return new objects and
never mutate their inputs, so distinct states can be processed by different
workers with no synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bloch import BlochVector, _gamma_value
from .errors import (
    ControlEqualsTargetError,
    DimensionMismatchError,
    IndexOutOfRangeError,
)

_SQRT1_2 = 1.0 / math.sqrt(2.0)
_T_PHASE = complex(math.cos(math.pi / 4.0), math.sin(math.pi / 4.0))

GATE_KINDS = ("H", "T", "CNOT")


@dataclass(frozen=True)
class Gate:
    """One gate from the H/T/CNOT set, bound to qubit indices.

    H and T take a single target; CNOT takes (control, target) with
    control != target.  Index upper bounds are checked at application time,
    when the register size is known.
    """

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise IndexOutOfRangeError(f"negative qubit index in {self.qubits}")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ControlEqualsTargetError(
                f"CNOT control and target coincide at qubit {self.qubits[0]}"
            )

    @property
    def control(self) -> int:
        if self.kind != "CNOT":
            raise AttributeError(f"{self.kind} has no control qubit")
        return self.qubits[0]

    @property
    def target(self) -> int:
        return self.qubits[1] if self.kind == "CNOT" else self.qubits[0]


def hadamard(q: int) -> Gate:
    return Gate("H", (q,))


def t_gate(q: int) -> Gate:
    return Gate("T", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


@dataclass
class PureState:
    """Normalized complex amplitude vector of length 2^n."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).copy()
        d = 1 << self.n
        if self.amplitudes.shape != (d,):
            raise DimensionMismatchError(
                f"expected {d} amplitudes for n={self.n}, got shape {self.amplitudes.shape}"
            )
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state vector is not normalized: |psi| = {norm}")

    @property
    def d(self) -> int:
        return 1 << self.n

    def copy(self) -> "PureState":
        return PureState(self.n, self.amplitudes)

    @classmethod
    def _wrap(cls, n: int, amplitudes: np.ndarray) -> "PureState":
        # Adopt an array we already own, skipping the copy and norm check.
        out = cls.__new__(cls)
        out.n = n
        out.amplitudes = amplitudes
        return out


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite 2^n x 2^n matrix.

    The constructor checks shape and trace; Hermiticity and positivity are
    O(d^2)/O(d^3) and are verified by `validate`, which the test suite calls
    at checkpoints rather than on every operation.
    """

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128).copy()
        d = 1 << self.n
        if self.matrix.shape != (d, d):
            raise DimensionMismatchError(
                f"expected a {d}x{d} matrix for n={self.n}, got shape {self.matrix.shape}"
            )
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"density matrix trace is {tr}, expected 1")

    @property
    def d(self) -> int:
        return 1 << self.n

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.n, self.matrix)

    @classmethod
    def _wrap(cls, n: int, matrix: np.ndarray) -> "DensityMatrix":
        # Adopt an array we already own, skipping the copy and trace check.
        out = cls.__new__(cls)
        out.n = n
        out.matrix = matrix
        return out

    def validate(self, atol: float = 1e-10, eig_floor: float = -1e-9) -> None:
        """Raise if Hermiticity, trace or positivity are violated."""
        defect = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if defect > atol:
            raise ValueError(f"Hermiticity defect {defect} exceeds {atol}")
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > atol:
            raise ValueError(f"trace defect {abs(tr - 1.0)} exceeds {atol}")
        lo = float(np.linalg.eigvalsh(self.matrix)[0])
        if lo < eig_floor:
            raise ValueError(f"minimum eigenvalue {lo} below {eig_floor}")


@dataclass(frozen=True)
class KrausPair:
    """Two Kraus operators of a single-qubit channel, E0†E0 + E1†E1 = I."""

    e0: np.ndarray
    e1: np.ndarray

    def __post_init__(self):
        e0 = np.asarray(self.e0, dtype=np.complex128)
        e1 = np.asarray(self.e1, dtype=np.complex128)
        object.__setattr__(self, "e0", e0)
        object.__setattr__(self, "e1", e1)
        if e0.shape != (2, 2) or e1.shape != (2, 2):
            raise DimensionMismatchError("Kraus operators must be 2x2")
        comp = e0.conj().T @ e0 + e1.conj().T @ e1
        defect = float(np.max(np.abs(comp - np.eye(2))))
        if defect > 1e-14:
            raise ValueError(f"completeness defect {defect} exceeds 1e-14")


def kraus_amplitude_damping(g) -> KrausPair:
    """Kraus pair of the relaxation channel |1> -> |0> with probability gamma."""
    gamma = _gamma_value(g)
    e0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=np.complex128)
    e1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return KrausPair(e0, e1)


def initial_state(n: int, which: str = "zeros", form: str = "pure"):
    """Computational basis state |0...0> or |1...1> as a pure state or density matrix."""
    if n < 1:
        raise ValueError(f"need at least one qubit, got n={n}")
    if which not in ("zeros", "ones"):
        raise ValueError(f"which must be 'zeros' or 'ones', got {which!r}")
    d = 1 << n
    idx = 0 if which == "zeros" else d - 1
    if form == "pure":
        amps = np.zeros(d, dtype=np.complex128)
        amps[idx] = 1.0
        return PureState(n, amps)
    if form == "density":
        mat = np.zeros((d, d), dtype=np.complex128)
        mat[idx, idx] = 1.0
        return DensityMatrix(n, mat)
    raise ValueError(f"form must be 'pure' or 'density', got {form!r}")


def _check_qubit(n: int, q: int) -> None:
    if not 0 <= q < n:
        raise IndexOutOfRangeError(f"qubit {q} out of range for n={n}")


@lru_cache(maxsize=None)
def _cnot_source_indices(n: int, control: int, target: int) -> np.ndarray:
    # psi'[i] = psi[src[i]]: flip the target bit wherever the control bit is set.
    idx = np.arange(1 << n)
    cmask = 1 << (n - 1 - control)
    tmask = 1 << (n - 1 - target)
    src = np.where(idx & cmask, idx ^ tmask, idx)
    src.setflags(write=False)
    return src


# --- in-place kernels on raw arrays -------------------------------------
# Reshaping a length-2^n vector to (2^q, 2, 2^(n-1-q)) exposes qubit q as the
# middle axis; for a d x d matrix the same trick applies to the row block and
# to the column block separately.


def _h_pure(psi: np.ndarray, n: int, q: int) -> None:
    v = psi.reshape(1 << q, 2, -1)
    a = v[:, 0, :]
    b = v[:, 1, :]
    s = (a + b) * _SQRT1_2
    diff = (a - b) * _SQRT1_2
    v[:, 0, :] = s
    v[:, 1, :] = diff


def _t_pure(psi: np.ndarray, n: int, q: int) -> None:
    psi.reshape(1 << q, 2, -1)[:, 1, :] *= _T_PHASE


def _cnot_pure(psi: np.ndarray, n: int, control: int, target: int) -> None:
    psi[:] = psi[_cnot_source_indices(n, control, target)]


def _h_density(rho: np.ndarray, n: int, q: int) -> None:
    d = rho.shape[0]
    rows = rho.reshape(1 << q, 2, -1)
    a = rows[:, 0, :]
    b = rows[:, 1, :]
    s = a + b
    diff = a - b
    rows[:, 0, :] = s
    rows[:, 1, :] = diff
    cols = rho.reshape(d << q, 2, -1)
    a = cols[:, 0, :]
    b = cols[:, 1, :]
    s = a + b
    diff = a - b
    cols[:, 0, :] = s
    cols[:, 1, :] = diff
    rho *= 0.5


def _t_density(rho: np.ndarray, n: int, q: int) -> None:
    d = rho.shape[0]
    rho.reshape(1 << q, 2, -1)[:, 1, :] *= _T_PHASE
    rho.reshape(d << q, 2, -1)[:, 1, :] *= _T_PHASE.conjugate()


def _cnot_density(rho: np.ndarray, n: int, control: int, target: int) -> None:
    src = _cnot_source_indices(n, control, target)
    rho[:] = rho[np.ix_(src, src)]


def _ad_density(rho: np.ndarray, n: int, q: int, gamma: float) -> None:
    """Amplitude damping on qubit q of a density matrix, in place.

    Written as block arithmetic on the four (target-bit row, target-bit
    column) sectors; the |1><1| population leaks into |0><0| with weight
    gamma before the surviving blocks are scaled.
    """
    if gamma == 0.0:
        return
    left = 1 << q
    right = 1 << (n - 1 - q)
    sqrt_a = math.sqrt(1.0 - gamma)
    v = rho.reshape(left, 2, right, left, 2, right)
    bb = v[:, 1, :, :, 1, :]
    v[:, 0, :, :, 0, :] += gamma * bb
    v[:, 0, :, :, 1, :] *= sqrt_a
    v[:, 1, :, :, 0, :] *= sqrt_a
    bb *= 1.0 - gamma


def _apply_gate_array(arr: np.ndarray, n: int, gate: Gate, density: bool) -> None:
    for q in gate.qubits:
        _check_qubit(n, q)
    if gate.kind == "H":
        (_h_density if density else _h_pure)(arr, n, gate.qubits[0])
    elif gate.kind == "T":
        (_t_density if density else _t_pure)(arr, n, gate.qubits[0])
    else:
        (_cnot_density if density else _cnot_pure)(arr, n, gate.qubits[0], gate.qubits[1])


# --- public operations ----------------------------------------------------


def apply_gate(state, gate: Gate):
    """Apply one gate; returns a new state of the same kind as the input."""
    if isinstance(state, PureState):
        psi = state.amplitudes.copy()
        _apply_gate_array(psi, state.n, gate, density=False)
        return PureState._wrap(state.n, psi)
    if isinstance(state, DensityMatrix):
        rho = state.matrix.copy()
        _apply_gate_array(rho, state.n, gate, density=True)
        return DensityMatrix._wrap(state.n, rho)
    raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")


def apply_kraus_single(rho: DensityMatrix, qubit: int, pair: KrausPair) -> DensityMatrix:
    """Apply a single-qubit channel sum_k E_k rho E_k† to one qubit.

    Generic over the Kraus pair: the density matrix is viewed as 2x2 blocks
    in the target qubit and each operator contributes
    K[x,u] conj(K[y,v]) rho_uv to block (x, y).  Zero matrix elements are
    skipped, so structured channels cost a handful of O(d^2) updates.
    """
    _check_qubit(rho.n, qubit)
    left = 1 << qubit
    right = 1 << (rho.n - 1 - qubit)
    v = rho.matrix.reshape(left, 2, right, left, 2, right)
    blocks = [[v[:, u, :, :, w, :] for w in (0, 1)] for u in (0, 1)]
    out = np.zeros_like(rho.matrix)
    ov = out.reshape(left, 2, right, left, 2, right)
    for k in (pair.e0, pair.e1):
        for x in (0, 1):
            for y in (0, 1):
                for u in (0, 1):
                    for w in (0, 1):
                        coeff = k[x, u] * k[y, w].conjugate()
                        if coeff != 0.0:
                            ov[:, x, :, :, y, :] += coeff * blocks[u][w]
    return DensityMatrix._wrap(rho.n, out)


def diag_probs(state) -> np.ndarray:
    """Computational-basis probabilities: |psi_i|^2 or the density diagonal.

    Diagonal entries within -1e-12 of zero are clamped to 0; anything more
    negative signals a broken state and raises.
    """
    if isinstance(state, PureState):
        amps = state.amplitudes
        p = amps.real**2 + amps.imag**2
    elif isinstance(state, DensityMatrix):
        p = np.real(np.diagonal(state.matrix)).copy()
    else:
        raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")
    lo = float(p.min()) if p.size else 0.0
    if lo < -1e-12:
        raise ValueError(f"diagonal entry {lo} is too negative to be a probability")
    np.clip(p, 0.0, None, out=p)
    return p


def density_from_pure(psi: PureState) -> DensityMatrix:
    """Rank-one projector |psi><psi|."""
    return DensityMatrix(psi.n, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def density_from_bloch(r: BlochVector) -> DensityMatrix:
    """One-qubit density matrix (I + r . sigma) / 2."""
    mat = 0.5 * np.array(
        [[1.0 + r.z, r.x - 1j * r.y], [r.x + 1j * r.y, 1.0 - r.z]],
        dtype=np.complex128,
    )
    return DensityMatrix(1, mat)


def bloch_vector_of(rho: DensityMatrix) -> BlochVector:
    """Bloch components (x, y, z) of a one-qubit density matrix."""
    if rho.n != 1:
        raise DimensionMismatchError("Bloch decomposition applies to one qubit only")
    m = rho.matrix
    return BlochVector(
        2.0 * m[0, 1].real,
        -2.0 * m[0, 1].imag,
        (m[0, 0] - m[1, 1]).real,
    )
