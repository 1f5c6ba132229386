"""
Dense statevector simulator.

Bit convention: qubit ``q`` is bit ``q`` of the basis index, so qubit 0 is the
least-significant bit. ``|q1=0, q0=1>`` is index 1.

Two layers live here:

* array kernels (``*_amps``) that act on raw amplitude arrays of shape
  ``(..., 2**n)``. Leading axes are batch axes; gate angles may carry matching
  leading axes so one call evolves many circuits with different parameters.
* the ``StateVector`` value type and its operations, which validate inputs and
  return a fresh state on every call.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidGateError

MAX_QUBITS = 10
UNITARY_TOL = 1e-12

_SQRT2_INV = 1.0 / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Gate matrices
# ---------------------------------------------------------------------------

def rx_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.empty(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -1j * s
    m[..., 1, 0] = -1j * s
    m[..., 1, 1] = c
    return m


def ry_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.empty(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def rz_matrix(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    m = np.zeros(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = np.exp(-0.5j * theta)
    m[..., 1, 1] = np.exp(0.5j * theta)
    return m


def phase_matrix(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    m = np.zeros(phi.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 1, 1] = np.exp(1j * phi)
    return m


@dataclass(frozen=True)
class Gate1Q:
    """A validated 2x2 unitary."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidGateError(f"single-qubit gate must be 2x2, got {m.shape}")
        if np.max(np.abs(m @ m.conj().T - np.eye(2))) > UNITARY_TOL:
            raise InvalidGateError("gate matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def adjoint(self) -> "Gate1Q":
        return Gate1Q(self.matrix.conj().T)

    @classmethod
    def rx(cls, theta: float) -> "Gate1Q":
        return cls(rx_matrix(theta))

    @classmethod
    def ry(cls, theta: float) -> "Gate1Q":
        return cls(ry_matrix(theta))

    @classmethod
    def rz(cls, theta: float) -> "Gate1Q":
        return cls(rz_matrix(theta))

    @classmethod
    def phase(cls, phi: float) -> "Gate1Q":
        return cls(phase_matrix(phi))


H = Gate1Q(np.array([[1, 1], [1, -1]]) * _SQRT2_INV)
X = Gate1Q(np.array([[0, 1], [1, 0]]))
Y = Gate1Q(np.array([[0, -1j], [1j, 0]]))
Z = Gate1Q(np.array([[1, 0], [0, -1]]))


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------

def _split(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    # index = hi * 2**(q+1) + bit * 2**q + lo
    return amps.reshape(amps.shape[:-1] + (1 << (n - 1 - q), 2, 1 << q))


def _check_qubit(n: int, q: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"qubit index {q} out of range for {n} qubits")


def apply_matrix_amps(amps: np.ndarray, n: int, q: int, matrix) -> np.ndarray:
    """Apply a 2x2 matrix (or a batch of them, shape ``(..., 2, 2)``) to qubit ``q``."""
    m = np.asarray(matrix)
    v = _split(amps, n, q)
    a0, a1 = v[..., 0, :], v[..., 1, :]
    m00 = m[..., 0, 0][..., None, None]
    m01 = m[..., 0, 1][..., None, None]
    m10 = m[..., 1, 0][..., None, None]
    m11 = m[..., 1, 1][..., None, None]
    out = np.empty(np.broadcast_shapes(v.shape, m00.shape + (1,)), dtype=complex)
    out[..., 0, :] = m00 * a0 + m01 * a1
    out[..., 1, :] = m10 * a0 + m11 * a1
    return out.reshape(out.shape[:-3] + (1 << n,))


def apply_phase_amps(amps: np.ndarray, n: int, q: int, phi) -> np.ndarray:
    """Multiply amplitudes whose bit ``q`` is set by ``exp(i*phi)``."""
    factor = np.exp(1j * np.asarray(phi, dtype=float))[..., None, None]
    v = _split(amps, n, q)
    out = np.empty(np.broadcast_shapes(v.shape, factor.shape + (1,)), dtype=complex)
    out[..., 0, :] = v[..., 0, :]
    out[..., 1, :] = factor * v[..., 1, :]
    return out.reshape(out.shape[:-3] + (1 << n,))


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n)
    flip = (idx >> control) & 1
    return idx ^ (flip << target)


def apply_cnot_amps(amps: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    return amps[..., _cnot_permutation(n, control, target)]


def prob_zero_amps(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    v = _split(amps, n, q)[..., 0, :]
    return np.sum(v.real**2 + v.imag**2, axis=(-2, -1))


# ---------------------------------------------------------------------------
# Gate lists
# ---------------------------------------------------------------------------

class Op(NamedTuple):
    """One gate of a circuit plan.

    ``angle`` is a fixed angle (scalar or per-batch array); ``param`` indexes the
    trainable parameter vector instead. ``PREP`` marks direct state preparation
    and is never executed by :func:`run_ops`.
    """

    name: str
    qubits: tuple
    angle: object = None
    param: int | None = None


_ROTATIONS = {"RX": rx_matrix, "RY": ry_matrix, "RZ": rz_matrix}


def run_ops(amps: np.ndarray, n: int, ops: Sequence[Op], theta=None) -> np.ndarray:
    """Execute ``ops`` in order. ``theta`` has shape ``(..., n_params)``."""
    for op in ops:
        if op.name == "CNOT":
            amps = apply_cnot_amps(amps, n, *op.qubits)
            continue
        if op.name == "PREP":
            continue
        q = op.qubits[0]
        if op.name == "H":
            amps = apply_matrix_amps(amps, n, q, H.matrix)
            continue
        angle = op.angle if op.param is None else np.asarray(theta)[..., op.param]
        if op.name == "P":
            amps = apply_phase_amps(amps, n, q, angle)
        elif op.name in _ROTATIONS:
            amps = apply_matrix_amps(amps, n, q, _ROTATIONS[op.name](angle))
        else:
            raise InvalidGateError(f"unknown gate {op.name!r}")
    return amps


# ---------------------------------------------------------------------------
# StateVector interface
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ConfigurationError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def zero_state(n_qubits: int) -> StateVector:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits!r}")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(int(n_qubits), amps)


def apply_1q(state: StateVector, gate: Gate1Q | np.ndarray, q: int) -> StateVector:
    if not isinstance(gate, Gate1Q):
        gate = Gate1Q(gate)
    _check_qubit(state.n_qubits, q)
    return StateVector(state.n_qubits, apply_matrix_amps(state.amplitudes, state.n_qubits, q, gate.matrix))


def apply_phase(state: StateVector, q: int, phi: float) -> StateVector:
    _check_qubit(state.n_qubits, q)
    return StateVector(state.n_qubits, apply_phase_amps(state.amplitudes, state.n_qubits, q, phi))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    if control == target:
        raise InvalidGateError("CNOT control and target must differ")
    _check_qubit(state.n_qubits, control)
    _check_qubit(state.n_qubits, target)
    return StateVector(state.n_qubits, apply_cnot_amps(state.amplitudes, state.n_qubits, control, target))


def prob_zero(
    state: StateVector,
    q: int,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Probability of reading 0 on qubit ``q``.

    Exact by default. With ``shots`` the estimate is a seeded multinomial draw
    over the basis-state probabilities.
    """
    _check_qubit(state.n_qubits, q)
    if shots is None:
        return float(prob_zero_amps(state.amplitudes, state.n_qubits, q))
    return sample_prob_zero(state.amplitudes, state.n_qubits, q, shots, rng)


def prob_one(state: StateVector, q: int) -> float:
    _check_qubit(state.n_qubits, q)
    v = _split(state.amplitudes, state.n_qubits, q)[..., 1, :]
    return float(np.sum(np.abs(v) ** 2))


def sample_prob_zero(amps: np.ndarray, n: int, q: int, shots: int, rng: np.random.Generator | None) -> float:
    if shots < 1:
        raise ConfigurationError("shots must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    probs = np.abs(amps) ** 2
    counts = rng.multinomial(shots, probs / probs.sum())
    zero_mask = ((np.arange(1 << n) >> q) & 1) == 0
    return float(counts[zero_mask].sum() / shots)
