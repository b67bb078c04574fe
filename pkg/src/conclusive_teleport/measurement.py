"""Projective measurements and two-state unambiguous discrimination POVMs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .statevec import (
    EXACT_TOL,
    StateVector,
    _check_labels,
    apply_local,
    merge_qubits,
    split_qubits,
)

PROB_SUM_TOL = 1e-10

IDENTIFY_PLUS = "identify_plus"
IDENTIFY_MINUS = "identify_minus"
INCONCLUSIVE = "inconclusive"


class RandomSource(Protocol):
    def random(self) -> float: ...


@dataclass(frozen=True)
class ProjectorSet:
    """Ordered orthogonal projectors on ``subsystem``, each given by an orthonormal
    basis of its range. Validated for orthonormality and completeness."""

    subsystem: tuple[int, ...]
    projectors: tuple[tuple[StateVector, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "subsystem", tuple(int(q) for q in self.subsystem))
        object.__setattr__(self, "projectors", tuple(tuple(p) for p in self.projectors))
        k = len(self.subsystem)
        vecs = [v for p in self.projectors for v in p]
        if any(len(p) == 0 for p in self.projectors):
            raise ValueError("every projector needs at least one basis vector")
        if any(v.num_qubits != k for v in vecs):
            raise ValueError(f"basis vectors must act on {k} qubit(s)")
        if len(vecs) != 2**k:
            raise ValueError(f"ranks sum to {len(vecs)}, expected {2**k}")
        frame = np.array([v.amplitudes for v in vecs])
        frame.setflags(write=False)
        object.__setattr__(self, "_frame", frame)
        object.__setattr__(self, "_starts", np.cumsum([0] + [len(p) for p in self.projectors[:-1]]))
        gram = frame.conj() @ frame.T
        if not np.allclose(gram, np.eye(2**k), rtol=0.0, atol=EXACT_TOL):
            raise ValueError("projector basis vectors are not orthonormal")

    def frame(self) -> np.ndarray:
        """All basis vectors stacked as rows, in projector order."""
        return self._frame

    @property
    def ranks(self) -> list[int]:
        return [len(p) for p in self.projectors]

    def matrix(self, i: int) -> np.ndarray:
        vs = np.array([v.amplitudes for v in self.projectors[i]])
        return vs.T @ vs.conj()

    def matrices(self) -> list[np.ndarray]:
        return [self.matrix(i) for i in range(len(self.projectors))]

    @classmethod
    def computational(cls, subsystem: Sequence[int]) -> "ProjectorSet":
        k = len(subsystem)
        return cls(tuple(subsystem), tuple((StateVector.basis(k, i),) for i in range(2**k)))


@dataclass(frozen=True, eq=False)
class Povm:
    """Single-qubit POVM with its measurement operators.

    ``operators`` default to the positive square roots of the effects.
    Construction only checks shapes; see :func:`validate_povm`.
    """

    effects: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    operators: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        effects = tuple(_frozen_2x2(e) for e in self.effects)
        labels = tuple(self.labels)
        if len(labels) != len(effects):
            raise ValueError("need exactly one label per effect")
        if self.operators is None:
            operators = tuple(_frozen_2x2(_psd_sqrt(e)) for e in effects)
        else:
            operators = tuple(_frozen_2x2(m) for m in self.operators)
            if len(operators) != len(effects):
                raise ValueError("need exactly one measurement operator per effect")
            for m, e in zip(operators, effects):
                if not np.allclose(m.conj().T @ m, e, rtol=0.0, atol=EXACT_TOL):
                    raise ValueError("measurement operator does not reproduce its effect")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "operators", operators)

    def kraus(self) -> tuple[np.ndarray, ...]:
        return self.operators

    def effect(self, label: str) -> np.ndarray:
        return self.effects[self.labels.index(label)]

    @classmethod
    def from_projectors(cls, projectors: ProjectorSet) -> "Povm":
        if len(projectors.subsystem) != 1:
            raise ValueError("Povm is single-qubit")
        return cls(tuple(projectors.matrices()), tuple(str(i) for i in range(len(projectors.projectors))))


@dataclass(frozen=True)
class PovmReport:
    completeness_residual: float
    min_eigenvalue: float

    @property
    def valid(self) -> bool:
        return self.completeness_residual < EXACT_TOL and self.min_eigenvalue >= -EXACT_TOL


@dataclass(frozen=True)
class MeasurementOutcome:
    outcome_index: int
    probability: float
    post_state: StateVector


def _frozen_2x2(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"effects must be 2x2, got {m.shape}")
    m.setflags(write=False)
    return m


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(matrix)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def inverse_cdf(probabilities: Sequence[float], u: float | np.ndarray) -> int | np.ndarray:
    """Map uniform draw(s) in [0, 1) to outcome indices.

    Works elementwise on arrays so sampled trajectories can be replayed in bulk.
    Draws landing past the last cumulative value (rounding) go to the last
    outcome with nonzero probability.
    """
    probs = np.asarray(probabilities, dtype=float)
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, u, side="right")
    last = int(np.flatnonzero(probs > 0)[-1])
    idx = np.minimum(idx, last)
    return int(idx) if np.ndim(idx) == 0 else idx


def _check_total(probs: np.ndarray) -> None:
    total = float(probs.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"outcome probabilities sum to {total!r}, measurement is not complete")


def born_probabilities(state: StateVector, projectors: ProjectorSet) -> list[float]:
    _check_labels(projectors.subsystem, state.num_qubits)
    mat = split_qubits(state.amplitudes, projectors.subsystem)
    coeffs = projectors.frame().conj() @ mat
    weights = np.sum(np.abs(coeffs) ** 2, axis=1)
    probs = np.add.reduceat(weights, projectors._starts)
    _check_total(probs)
    return [float(p) for p in probs]


def project(state: StateVector, projectors: ProjectorSet, index: int) -> np.ndarray:
    """Unnormalised ``P_index |state>``."""
    mat = split_qubits(state.amplitudes, projectors.subsystem)
    vs = np.array([v.amplitudes for v in projectors.projectors[index]])
    return merge_qubits(vs.T @ (vs.conj() @ mat), projectors.subsystem)


def measure_projective(
    state: StateVector, projectors: ProjectorSet, randomness: RandomSource
) -> MeasurementOutcome:
    probs = born_probabilities(state, projectors)
    i = inverse_cdf(probs, randomness.random())
    return MeasurementOutcome(i, probs[i], StateVector.normalized(project(state, projectors, i)))


def validate_povm(povm: Povm) -> PovmReport:
    total = sum(povm.effects, np.zeros((2, 2), dtype=np.complex128))
    residual = float(np.max(np.abs(total - np.eye(2))))
    min_eig = min(float(np.linalg.eigvalsh(e).min()) for e in povm.effects)
    return PovmReport(residual, min_eig)


def _orthogonal(u: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(u[1]), np.conj(u[0])])


def build_idp_povm(u_plus: StateVector, u_minus: StateVector) -> Povm:
    """Optimal equal-prior unambiguous discrimination of two pure qubit states.

    ``E+`` is the projector onto the complement of ``u_minus`` scaled by
    ``1 / (1 + s)`` with ``s = |<u+|u->|``, and symmetrically for ``E-``; the
    conclusive probability on either input is ``1 - s``. All three effects
    are rank one, so they and their square roots are written in closed form
    rather than recovered from an eigendecomposition (whose ~1e-16 spurious
    eigenvalues would leak ~1e-8 into the square roots).
    """
    if u_plus.num_qubits != 1 or u_minus.num_qubits != 1:
        raise ValueError("IDP POVM discriminates single-qubit states")
    labels = (IDENTIFY_PLUS, IDENTIFY_MINUS, INCONCLUSIVE)
    overlap = np.vdot(u_plus.amplitudes, u_minus.amplitudes)
    s = float(abs(overlap))
    if s >= 1.0 - EXACT_TOL:
        zero = np.zeros((2, 2), dtype=np.complex128)
        eye = np.eye(2, dtype=np.complex128)
        return Povm((zero, zero, eye), labels, (zero, zero, eye))
    not_minus = _orthogonal(u_minus.amplitudes)
    not_plus = _orthogonal(u_plus.amplitudes)
    proj_plus = np.outer(not_minus, not_minus.conj())
    proj_minus = np.outer(not_plus, not_plus.conj())
    if s == 0.0:
        fail_dir = np.zeros(2, dtype=np.complex128)
    else:
        # E+ + E- has eigenvalue (1 - s)/(1 + s) along this direction, so it
        # carries all of the inconclusive weight
        phase = np.vdot(not_plus, not_minus) / s
        fail_dir = not_minus - phase * not_plus
        fail_dir = fail_dir / np.linalg.norm(fail_dir)
    proj_fail = np.outer(fail_dir, fail_dir.conj())
    weight_fail = 2 * s / (1 + s)
    effects = (proj_plus / (1 + s), proj_minus / (1 + s), weight_fail * proj_fail)
    operators = (
        proj_plus / np.sqrt(1 + s),
        proj_minus / np.sqrt(1 + s),
        np.sqrt(weight_fail) * proj_fail,
    )
    return Povm(effects, labels, operators)


def povm_probabilities(state: StateVector, povm: Povm, target: int) -> list[float]:
    _check_labels([target], state.num_qubits)
    mat = split_qubits(state.amplitudes, [target])
    rho = mat @ mat.conj().T
    probs = np.array([max(float(np.real(np.trace(e @ rho))), 0.0) for e in povm.effects])
    _check_total(probs)
    return [float(p) for p in probs]


def apply_povm(
    state: StateVector, povm: Povm, target: int, randomness: RandomSource
) -> MeasurementOutcome:
    """Sample a POVM outcome on ``target``; the post-state uses ``sqrt(E_i)``."""
    report = validate_povm(povm)
    if not report.valid:
        raise ValueError(f"invalid POVM: {report}")
    probs = povm_probabilities(state, povm, target)
    i = inverse_cdf(probs, randomness.random())
    post = apply_local(state.amplitudes, [target], povm.kraus()[i])
    return MeasurementOutcome(i, probs[i], StateVector.normalized(post))
