"""Dense state vectors over a handful of labelled qubits.

Qubit 0 is the most significant bit of the amplitude index, so the ket
``|q0 q1 ... q_{n-1}>`` sits at index ``int("q0q1...", 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: tolerance for exact-math invariants (norms, unitarity, orthonormality)
EXACT_TOL = 1e-12
#: tolerance for post-measurement factorisation after a full protocol run
FACTOR_TOL = 1e-10
#: accepted drift of the squared norm when a StateVector is constructed
NORM_TOL = 1e-10

MAX_QUBITS = 10


class FactorizationError(ValueError):
    """The state does not split as witnessed (x) remainder."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised pure state of ``num_qubits`` qubits.

    The amplitude array is copied on construction and made read-only.
    """

    amplitudes: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128).ravel()
        dim = amps.size
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"amplitude vector length {dim} is not a power of two >= 2")
        n = dim.bit_length() - 1
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (|psi|^2 = {norm_sq!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", n)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex] | np.ndarray) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalise the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        """``StateVector.from_bits("011")`` is the ket |011>."""
        return cls.basis(len(bits), int(bits, 2))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def allclose(self, other: "StateVector", atol: float = EXACT_TOL) -> bool:
        """Amplitude-wise equality (global phase matters)."""
        return self.num_qubits == other.num_qubits and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={np.array2string(self.amplitudes, precision=6)})"


# Single-qubit gates used as Bob's corrections.
IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_Z_SIGMA_X = SIGMA_Z @ SIGMA_X
for _g in (IDENTITY, SIGMA_X, SIGMA_Z, SIGMA_Z_SIGMA_X):
    _g.setflags(write=False)


def split_qubits(amplitudes: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Reshape amplitudes into a ``(2**k, 2**(n-k))`` matrix with ``qubits`` as rows.

    Row index runs over ``qubits`` in the given order; the column index runs
    over the remaining qubits in ascending order.
    """
    n = int(amplitudes.size).bit_length() - 1
    qubits = list(qubits)
    _check_labels(qubits, n)
    rest = [q for q in range(n) if q not in qubits]
    tensor = amplitudes.reshape((2,) * n).transpose(qubits + rest)
    return tensor.reshape(2 ** len(qubits), 2 ** len(rest))


def merge_qubits(matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`split_qubits`."""
    n = int(matrix.size).bit_length() - 1
    qubits = list(qubits)
    rest = [q for q in range(n) if q not in qubits]
    order = qubits + rest
    tensor = matrix.reshape((2,) * n).transpose(np.argsort(order))
    return np.ascontiguousarray(tensor).reshape(-1)


def apply_local(amplitudes: np.ndarray, qubits: Sequence[int], operator: np.ndarray) -> np.ndarray:
    """Apply an arbitrary (not necessarily unitary) operator on ``qubits``.

    Returns raw amplitudes; no renormalisation.
    """
    mat = split_qubits(np.asarray(amplitudes, dtype=np.complex128), qubits)
    if operator.shape != (mat.shape[0], mat.shape[0]):
        raise ValueError(f"operator shape {operator.shape} does not match {len(qubits)} qubit(s)")
    return merge_qubits(operator @ mat, qubits)


def _check_labels(qubits: Sequence[int], num_qubits: int) -> None:
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit label in {list(qubits)}")
    for q in qubits:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit label {q} out of range for a {num_qubits}-qubit state")


def is_unitary(matrix: np.ndarray, atol: float = EXACT_TOL) -> bool:
    matrix = np.asarray(matrix)
    return matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1] and bool(
        np.allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), rtol=0.0, atol=atol)
    )


def tensor_product(left: StateVector, right: StateVector) -> StateVector:
    """``left (x) right``; left's qubits take the more significant index bits."""
    return StateVector(np.outer(left.amplitudes, right.amplitudes).ravel())


def apply_gate(state: StateVector, target: int, gate: np.ndarray) -> StateVector:
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2) or not is_unitary(gate):
        raise ValueError("gate must be a 2x2 unitary")
    _check_labels([target], state.num_qubits)
    return StateVector(apply_local(state.amplitudes, [target], gate))


def fidelity(state_a: StateVector, state_b: StateVector) -> float:
    """|<a|b>|^2 for pure states."""
    if state_a.num_qubits != state_b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {state_a.num_qubits} vs {state_b.num_qubits} qubits"
        )
    overlap = np.vdot(state_a.amplitudes, state_b.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def extract_subsystem(
    state: StateVector, measured_qubits: Sequence[int], witnessed_basis_state: StateVector
) -> StateVector:
    """Factor ``state = witnessed (x) remainder`` and return the remainder.

    ``witnessed_basis_state`` is ordered like ``measured_qubits``; the
    remainder keeps the unmeasured qubits in ascending order. Raises
    :class:`FactorizationError` if the product residual exceeds ``FACTOR_TOL``.
    """
    measured = list(measured_qubits)
    if witnessed_basis_state.num_qubits != len(measured):
        raise ValueError("witnessed state must have one qubit per measured label")
    if len(measured) >= state.num_qubits:
        raise ValueError("nothing left to extract")
    mat = split_qubits(state.amplitudes, measured)
    w = witnessed_basis_state.amplitudes
    remainder = w.conj() @ mat
    residual = float(np.max(np.abs(mat - np.outer(w, remainder))))
    if residual > FACTOR_TOL:
        raise FactorizationError(
            f"state does not factor on qubits {measured} (residual {residual:.3e})"
        )
    return StateVector.normalized(remainder)
