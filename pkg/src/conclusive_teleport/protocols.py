"""Teleportation protocols over a partially entangled pure channel.

Three protocols share one record type:

* ``qubit-assisted``: Alice adds an ancilla carrying the channel's Schmidt
  coefficients, measures her three qubits with six projectors, and falls
  back to unambiguous discrimination when the outcome is one of the two
  rank-2 projectors.
* ``bbcjpw``: standard teleportation over a maximally entangled pair.
* ``mor-horodecki``: Alice filters her half of the channel towards a
  maximally entangled pair, then runs standard teleportation.

Qubit layout for the qubit-assisted protocol: 0 = unknown input,
1 = ancilla, 2 = Alice's channel half, 3 = Bob. The baselines use
0 = input, 1 = Alice's half, 2 = Bob.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .measurement import (
    Povm,
    ProjectorSet,
    RandomSource,
    apply_povm,
    born_probabilities,
    build_idp_povm,
    measure_projective,
    povm_probabilities,
    project,
)
from .statevec import (
    EXACT_TOL,
    IDENTITY,
    SIGMA_X,
    SIGMA_Z,
    SIGMA_Z_SIGMA_X,
    StateVector,
    apply_gate,
    apply_local,
    extract_subsystem,
    fidelity,
    split_qubits,
    tensor_product,
)

QUBIT_ASSISTED = "qubit-assisted"
BBCJPW = "bbcjpw"
MOR_HORODECKI = "mor-horodecki"
PROTOCOLS = (QUBIT_ASSISTED, BBCJPW, MOR_HORODECKI)

# branches whose unnormalised weight falls below this are never realised
NULL_BRANCH = 1e-24

QA_LABELS = (
    "phi5", "phi6", "phi7", "phi8",
    "subspace1_plus", "subspace1_minus", "subspace1_fail",
    "subspace2_plus", "subspace2_minus", "subspace2_fail",
)
BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")
FILTER_FAIL = "filter_fail"

CORRECTION_GATES = {
    "identity": IDENTITY,
    "sigma_z": SIGMA_Z,
    "sigma_x": SIGMA_X,
    "sigma_z_sigma_x": SIGMA_Z_SIGMA_X,
}
CORRECTION_BITS = {
    "identity": (0, 0),
    "sigma_z": (0, 1),
    "sigma_x": (1, 0),
    "sigma_z_sigma_x": (1, 1),
}
CORRECTION_TABLE = {
    "phi5": "identity",
    "phi6": "sigma_z",
    "phi7": "sigma_x",
    "phi8": "sigma_z_sigma_x",
    "subspace1_plus": "identity",
    "subspace1_minus": "sigma_z",
    "subspace2_plus": "sigma_x",
    "subspace2_minus": "sigma_z_sigma_x",
}
BELL_CORRECTIONS = dict(zip(BELL_LABELS, ("identity", "sigma_z", "sigma_x", "sigma_z_sigma_x")))


@dataclass(frozen=True)
class ChannelSpec:
    """Shared state ``alpha|00> + beta|11>`` with real ``alpha >= beta >= 0``."""

    alpha: float
    beta: float
    alpha_sq: float = field(init=False, repr=False, compare=False)
    beta_sq: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if abs(self.alpha**2 + self.beta**2 - 1.0) > EXACT_TOL:
            raise ValueError("alpha^2 + beta^2 must equal 1")
        if not self.alpha >= self.beta >= 0.0:
            raise ValueError("channel requires alpha >= beta >= 0")
        object.__setattr__(self, "alpha_sq", self.alpha**2)
        object.__setattr__(self, "beta_sq", self.beta**2)

    @classmethod
    def from_alpha_sq(cls, alpha_sq: float) -> "ChannelSpec":
        if not 0.5 <= alpha_sq <= 1.0:
            raise ValueError("alpha_sq must lie in [0.5, 1]")
        channel = cls(math.sqrt(alpha_sq), math.sqrt(1.0 - alpha_sq))
        # keep the squares exact rather than re-squaring the roots
        object.__setattr__(channel, "alpha_sq", float(alpha_sq))
        object.__setattr__(channel, "beta_sq", 1.0 - alpha_sq)
        return channel

    @classmethod
    def maximally_entangled(cls) -> "ChannelSpec":
        return cls.from_alpha_sq(0.5)

    def ancilla(self) -> StateVector:
        return StateVector.normalized([self.alpha, self.beta])

    def pair(self) -> StateVector:
        return StateVector.normalized([self.alpha, 0, 0, self.beta])


@dataclass(frozen=True)
class InputQubit:
    a: complex
    b: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > EXACT_TOL:
            raise ValueError("input qubit must satisfy |a|^2 + |b|^2 = 1")

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "InputQubit":
        norm = math.hypot(abs(a), abs(b))
        return cls(a / norm, b / norm)

    def as_state(self) -> StateVector:
        return StateVector([self.a, self.b])


@dataclass(frozen=True)
class PhiBasis:
    states: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        if len(self.states) != 8 or any(s.num_qubits != 3 for s in self.states):
            raise ValueError("PhiBasis holds eight 3-qubit states")

    def gram(self) -> np.ndarray:
        m = np.array([s.amplitudes for s in self.states])
        return m.conj() @ m.T


@dataclass(frozen=True, eq=False)
class TeleportationRecord:
    """One branch of a protocol run.

    ``bob_state`` is Bob's qubit after his correction (uncorrected on
    failure); it is ``None`` only for enumerated branches that carry zero
    probability and therefore have no conditional state.
    """

    outcome_label: str
    correction: str
    success: bool
    bob_state: Optional[StateVector]
    branch_probability: float
    classical_bits: tuple[int, int, int] = field(init=False)

    def __post_init__(self) -> None:
        if self.correction not in CORRECTION_GATES:
            raise ValueError(f"unknown correction {self.correction!r}")
        object.__setattr__(self, "classical_bits", _message(self.success, self.correction))

    def fidelity_with(self, inp: InputQubit) -> float:
        if self.bob_state is None:
            return float("nan")
        return fidelity(self.bob_state, inp.as_state())


def _message(success: bool, correction: str) -> tuple[int, int, int]:
    if not success:
        return (0, 0, 0)
    return (1, *CORRECTION_BITS[correction])


def encode_classical_message(record: TeleportationRecord) -> tuple[int, int, int]:
    """Success bit followed by the two correction bits; zeros on failure."""
    return _message(record.success, record.correction)


@lru_cache(maxsize=None)
def build_phi_basis() -> PhiBasis:
    r = 1 / math.sqrt(2)
    k = StateVector.from_bits
    combos = [
        k("000").amplitudes,
        k("111").amplitudes,
        k("011").amplitudes,
        k("100").amplitudes,
        r * (k("010").amplitudes + k("101").amplitudes),
        r * (k("010").amplitudes - k("101").amplitudes),
        r * (k("001").amplitudes + k("110").amplitudes),
        r * (k("001").amplitudes - k("110").amplitudes),
    ]
    return PhiBasis(tuple(StateVector(c) for c in combos))


@lru_cache(maxsize=None)
def build_projectors(basis: PhiBasis | None = None) -> ProjectorSet:
    """Six projectors on qubits (0, 1, 2): two of rank 2 followed by four of rank 1."""
    phi = (basis or build_phi_basis()).states
    groups = ((phi[0], phi[1]), (phi[2], phi[3]), (phi[4],), (phi[5],), (phi[6],), (phi[7],))
    return ProjectorSet((0, 1, 2), groups)


@lru_cache(maxsize=None)
def bell_projectors(subsystem: tuple[int, int] = (0, 1)) -> ProjectorSet:
    r = 1 / math.sqrt(2)
    states = (
        StateVector([r, 0, 0, r]),
        StateVector([r, 0, 0, -r]),
        StateVector([0, r, r, 0]),
        StateVector([0, r, -r, 0]),
    )
    return ProjectorSet(subsystem, tuple((s,) for s in states))


def prepare_joint_state(inp: InputQubit, channel: ChannelSpec) -> StateVector:
    """input (x) ancilla (x) channel pair, four qubits."""
    return tensor_product(tensor_product(inp.as_state(), channel.ancilla()), channel.pair())


# --- qubit-assisted protocol ---------------------------------------------

_ALICE = (0, 1, 2)


def subspace_states(channel: ChannelSpec, subspace: int) -> tuple[StateVector, StateVector]:
    """The two nonorthogonal logical states Alice must tell apart after a rank-2 outcome."""
    a2, b2 = channel.alpha_sq, channel.beta_sq
    if subspace == 1:
        return StateVector.normalized([a2, b2]), StateVector.normalized([a2, -b2])
    if subspace == 2:
        return StateVector.normalized([b2, a2]), StateVector.normalized([b2, -a2])
    raise ValueError("subspace must be 1 or 2")


def to_logical(state: StateVector, subspace: int) -> np.ndarray:
    """Re-express a four-qubit state lying in span{Phi_odd, Phi_even} (x) Bob as
    raw amplitudes of (logical qubit, Bob)."""
    phi = build_phi_basis().states
    pair = (phi[0], phi[1]) if subspace == 1 else (phi[2], phi[3])
    mat = split_qubits(state.amplitudes, _ALICE)
    rows = np.array([p.amplitudes for p in pair]).conj() @ mat
    return rows.reshape(-1)


def _subspace_stage(post: StateVector, subspace: int, channel: ChannelSpec) -> tuple[StateVector, Povm]:
    logical = StateVector.normalized(to_logical(post, subspace))
    return logical, build_idp_povm(*subspace_states(channel, subspace))


def _factor_last(state: StateVector) -> StateVector:
    """Bob's pure state when he holds the last qubit of a product state."""
    rest = list(range(state.num_qubits - 1))
    mat = split_qubits(state.amplitudes, rest)
    u, _, _ = np.linalg.svd(mat)
    return extract_subsystem(state, rest, StateVector.normalized(u[:, 0]))


def _success_record(label: str, correction: str, bob: StateVector, probability: float) -> TeleportationRecord:
    fixed = apply_gate(bob, 0, CORRECTION_GATES[correction])
    return TeleportationRecord(label, correction, True, fixed, probability)


def _fail_record(label: str, bob: Optional[StateVector], probability: float) -> TeleportationRecord:
    return TeleportationRecord(label, "identity", False, bob, probability)


def _direct_record(k: int, post: StateVector, probability: float) -> TeleportationRecord:
    label = QA_LABELS[k - 2]
    bob = extract_subsystem(post, _ALICE, build_phi_basis().states[k + 2])
    return _success_record(label, CORRECTION_TABLE[label], bob, probability)


def _subspace_record(subspace: int, j: int, post: StateVector, probability: float) -> TeleportationRecord:
    label = f"subspace{subspace}_" + ("plus", "minus", "fail")[j]
    bob = _factor_last(post)
    if j == 2:
        return _fail_record(label, bob, probability)
    return _success_record(label, CORRECTION_TABLE[label], bob, probability)


def run_qubit_assisted(inp: InputQubit, channel: ChannelSpec, randomness: RandomSource) -> TeleportationRecord:
    """One sampled run: projective stage, then discrimination if needed.

    Consumes one uniform draw for the projective stage and one more when a
    rank-2 projector fires.
    """
    joint = prepare_joint_state(inp, channel)
    first = measure_projective(joint, build_projectors(), randomness)
    k = first.outcome_index
    if k >= 2:
        return _direct_record(k, first.post_state, first.probability)
    logical, povm = _subspace_stage(first.post_state, k + 1, channel)
    second = apply_povm(logical, povm, 0, randomness)
    return _subspace_record(k + 1, second.outcome_index, second.post_state,
                            first.probability * second.probability)


def enumerate_branches(inp: InputQubit, channel: ChannelSpec) -> list[TeleportationRecord]:
    """Every leaf of the qubit-assisted outcome tree with its exact probability."""
    joint = prepare_joint_state(inp, channel)
    projectors = build_projectors()
    probs = born_probabilities(joint, projectors)
    records: dict[str, TeleportationRecord] = {}
    for k, p in enumerate(probs):
        raw = project(joint, projectors, k)
        if k >= 2:
            label = QA_LABELS[k - 2]
            if p < NULL_BRANCH:
                records[label] = TeleportationRecord(label, CORRECTION_TABLE[label], True, None, p)
            else:
                records[label] = _direct_record(k, StateVector.normalized(raw), p)
            continue
        subspace = k + 1
        povm = build_idp_povm(*subspace_states(channel, subspace))
        names = ("plus", "minus", "fail")
        if p < NULL_BRANCH:
            for j, name in enumerate(names):
                label = f"subspace{subspace}_{name}"
                records[label] = TeleportationRecord(
                    label, CORRECTION_TABLE.get(label, "identity"), j < 2, None, 0.0
                )
            continue
        logical, _ = _subspace_stage(StateVector.normalized(raw), subspace, channel)
        p2 = povm_probabilities(logical, povm, 0)
        for j, (kraus, q) in enumerate(zip(povm.kraus(), p2)):
            label = f"subspace{subspace}_{names[j]}"
            weight = p * q
            if weight < NULL_BRANCH:
                records[label] = TeleportationRecord(
                    label, CORRECTION_TABLE.get(label, "identity"), j < 2, None, weight
                )
                continue
            post = StateVector.normalized(apply_local(logical.amplitudes, [0], kraus))
            records[label] = _subspace_record(subspace, j, post, weight)
    return [records[label] for label in QA_LABELS]


# --- baselines ------------------------------------------------------------

def _baseline_joint(inp: InputQubit, channel: ChannelSpec) -> StateVector:
    return tensor_product(inp.as_state(), channel.pair())


def _bell_record(k: int, post: StateVector, probability: float) -> TeleportationRecord:
    label = BELL_LABELS[k]
    witnessed = bell_projectors().projectors[k][0]
    bob = extract_subsystem(post, (0, 1), witnessed)
    return _success_record(label, BELL_CORRECTIONS[label], bob, probability)


def run_bbcjpw(inp: InputQubit, randomness: RandomSource) -> TeleportationRecord:
    """Standard teleportation; the channel is always maximally entangled."""
    joint = _baseline_joint(inp, ChannelSpec.maximally_entangled())
    out = measure_projective(joint, bell_projectors(), randomness)
    return _bell_record(out.outcome_index, out.post_state, out.probability)


def enumerate_bbcjpw(inp: InputQubit) -> list[TeleportationRecord]:
    joint = _baseline_joint(inp, ChannelSpec.maximally_entangled())
    bell = bell_projectors()
    probs = born_probabilities(joint, bell)
    return [_bell_record(k, StateVector.normalized(project(joint, bell, k)), p) for k, p in enumerate(probs)]


def filter_povm(channel: ChannelSpec) -> Povm:
    """Local filter on Alice's channel half; success leaves a maximally entangled pair."""
    ratio = channel.beta_sq / channel.alpha_sq
    succeed = np.diag([ratio, 1.0]).astype(np.complex128)
    return Povm((succeed, np.eye(2) - succeed), ("filter_success", FILTER_FAIL))


def run_mor_horodecki(inp: InputQubit, channel: ChannelSpec, randomness: RandomSource) -> TeleportationRecord:
    joint = _baseline_joint(inp, channel)
    filtered = apply_povm(joint, filter_povm(channel), 1, randomness)
    if filtered.outcome_index == 1:
        return _fail_record(FILTER_FAIL, _factor_last(filtered.post_state), filtered.probability)
    out = measure_projective(filtered.post_state, bell_projectors(), randomness)
    return _bell_record(out.outcome_index, out.post_state, filtered.probability * out.probability)


def enumerate_mor_horodecki(inp: InputQubit, channel: ChannelSpec) -> list[TeleportationRecord]:
    joint = _baseline_joint(inp, channel)
    povm = filter_povm(channel)
    p_succ, p_fail = povm_probabilities(joint, povm, 1)
    succ_kraus, fail_kraus = povm.kraus()
    records = []
    if p_succ < NULL_BRANCH:
        records += [TeleportationRecord(lbl, BELL_CORRECTIONS[lbl], True, None, 0.0) for lbl in BELL_LABELS]
    else:
        filtered = StateVector.normalized(apply_local(joint.amplitudes, [1], succ_kraus))
        bell = bell_projectors()
        probs = born_probabilities(filtered, bell)
        records += [
            _bell_record(k, StateVector.normalized(project(filtered, bell, k)), p_succ * p)
            for k, p in enumerate(probs)
        ]
    if p_fail < NULL_BRANCH:
        records.append(_fail_record(FILTER_FAIL, None, p_fail))
    else:
        failed = StateVector.normalized(apply_local(joint.amplitudes, [1], fail_kraus))
        records.append(_fail_record(FILTER_FAIL, _factor_last(failed), p_fail))
    return records


# --- protocol selection ---------------------------------------------------

def _check_protocol(protocol: str) -> None:
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")


def run_protocol(protocol: str, inp: InputQubit, channel: ChannelSpec, randomness: RandomSource) -> TeleportationRecord:
    _check_protocol(protocol)
    if protocol == QUBIT_ASSISTED:
        return run_qubit_assisted(inp, channel, randomness)
    if protocol == BBCJPW:
        return run_bbcjpw(inp, randomness)
    return run_mor_horodecki(inp, channel, randomness)


def enumerate_protocol(protocol: str, inp: InputQubit, channel: ChannelSpec) -> list[TeleportationRecord]:
    _check_protocol(protocol)
    if protocol == QUBIT_ASSISTED:
        return enumerate_branches(inp, channel)
    if protocol == BBCJPW:
        return enumerate_bbcjpw(inp)
    return enumerate_mor_horodecki(inp, channel)


def outcome_labels(protocol: str) -> tuple[str, ...]:
    _check_protocol(protocol)
    if protocol == QUBIT_ASSISTED:
        return QA_LABELS
    if protocol == BBCJPW:
        return BELL_LABELS
    return BELL_LABELS + (FILTER_FAIL,)


def success_probability(records: list[TeleportationRecord]) -> float:
    return float(sum(r.branch_probability for r in records if r.success))


@dataclass(frozen=True)
class OutcomeTree:
    """Per-stage outcome distributions exactly as a sampled run sees them.

    ``first`` is the first-stage distribution; ``second[i]`` the distribution
    of the follow-up measurement after first outcome ``i`` (absent when the
    run ends there or ``i`` cannot occur). ``labels`` maps index paths to
    branch labels.
    """

    first: tuple[float, ...]
    second: dict[int, tuple[float, ...]]
    labels: dict[tuple[int, ...], str]
    draws: int


def outcome_tree(protocol: str, inp: InputQubit, channel: ChannelSpec) -> OutcomeTree:
    _check_protocol(protocol)
    if protocol == QUBIT_ASSISTED:
        joint = prepare_joint_state(inp, channel)
        projectors = build_projectors()
        first = born_probabilities(joint, projectors)
        second, labels = {}, {}
        for k in range(2, 6):
            labels[(k,)] = QA_LABELS[k - 2]
        for k in (0, 1):
            for j, name in enumerate(("plus", "minus", "fail")):
                labels[(k, j)] = f"subspace{k + 1}_{name}"
            if first[k] > 0:
                post = StateVector.normalized(project(joint, projectors, k))
                logical, povm = _subspace_stage(post, k + 1, channel)
                second[k] = tuple(povm_probabilities(logical, povm, 0))
        return OutcomeTree(tuple(first), second, labels, 2)
    if protocol == BBCJPW:
        joint = _baseline_joint(inp, ChannelSpec.maximally_entangled())
        first = born_probabilities(joint, bell_projectors())
        return OutcomeTree(tuple(first), {}, {(k,): lbl for k, lbl in enumerate(BELL_LABELS)}, 1)
    joint = _baseline_joint(inp, channel)
    povm = filter_povm(channel)
    first = povm_probabilities(joint, povm, 1)
    labels = {(0, k): lbl for k, lbl in enumerate(BELL_LABELS)}
    labels[(1,)] = FILTER_FAIL
    second = {}
    if first[0] > 0:
        filtered = StateVector.normalized(apply_local(joint.amplitudes, [1], povm.kraus()[0]))
        second[0] = tuple(born_probabilities(filtered, bell_projectors()))
    return OutcomeTree(tuple(first), second, labels, 2)
