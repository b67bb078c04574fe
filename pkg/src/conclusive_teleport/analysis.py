"""Closed-form branch probabilities, seeded Monte Carlo and channel sweeps.

The closed forms here are written from the amplitudes of the product state
directly and never touch the state-vector machinery, so comparing them with
:func:`conclusive_teleport.protocols.enumerate_branches` checks two
independent derivations against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .measurement import RandomSource, inverse_cdf
from .protocols import (
    BBCJPW,
    BELL_LABELS,
    FILTER_FAIL,
    MOR_HORODECKI,
    QUBIT_ASSISTED,
    ChannelSpec,
    InputQubit,
    outcome_labels,
    outcome_tree,
    run_protocol,
)

HAAR = "haar"
DEFAULT_INPUT = InputQubit(0.6, 0.8)

InputChoice = Union[InputQubit, str]


@dataclass(frozen=True)
class AnalyticReport:
    channel: ChannelSpec
    per_outcome: dict[str, float]
    subspace_probabilities: tuple[float, float]
    success_total: float
    conclusive_within_subspace: float
    joint_conclusive_per_subspace: float


def conclusive_within_subspace(channel: ChannelSpec) -> float:
    """Conclusive probability of the discrimination step, 2 b^4 / (a^4 + b^4)."""
    a4, b4 = channel.alpha_sq**2, channel.beta_sq**2
    return 2 * b4 / (a4 + b4)


def analytic_outcome_probs(channel: ChannelSpec, inp: InputQubit) -> AnalyticReport:
    a2, b2 = channel.alpha_sq, channel.beta_sq
    a4, b4 = a2 * a2, b2 * b2
    pa, pb = abs(inp.a) ** 2, abs(inp.b) ** 2
    direct = a2 * b2 / 2
    sub1 = pa * a4 + pb * b4
    sub2 = pa * b4 + pb * a4
    per = {f"phi{k}": direct for k in (5, 6, 7, 8)}
    for i, sub in ((1, sub1), (2, sub2)):
        per[f"subspace{i}_plus"] = b4 / 2
        per[f"subspace{i}_minus"] = b4 / 2
        per[f"subspace{i}_fail"] = sub - b4
    return AnalyticReport(
        channel=channel,
        per_outcome=per,
        subspace_probabilities=(sub1, sub2),
        success_total=2 * b2,
        conclusive_within_subspace=conclusive_within_subspace(channel),
        joint_conclusive_per_subspace=b4,
    )


def analytic_branch_probs(protocol: str, channel: ChannelSpec, inp: InputQubit) -> dict[str, float]:
    """Exact per-label probabilities for any of the three protocols."""
    if protocol == QUBIT_ASSISTED:
        return analytic_outcome_probs(channel, inp).per_outcome
    if protocol == BBCJPW:
        return {label: 0.25 for label in BELL_LABELS}
    if protocol == MOR_HORODECKI:
        probs = {label: channel.beta_sq / 2 for label in BELL_LABELS}
        probs[FILTER_FAIL] = 1 - 2 * channel.beta_sq
        return probs
    outcome_labels(protocol)  # raises for unknown selectors
    raise AssertionError


def analytic_success(protocol: str, channel: ChannelSpec) -> float:
    outcome_labels(protocol)
    return 1.0 if protocol == BBCJPW else 2 * channel.beta_sq


def haar_from_normals(normals: Sequence[float]) -> InputQubit:
    x = np.asarray(normals, dtype=float)
    a, b = complex(x[0], x[1]), complex(x[2], x[3])
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return InputQubit(a / norm, b / norm)


def haar_random_input(randomness: np.random.Generator) -> InputQubit:
    """Uniform pure qubit from a normalised pair of complex Gaussians."""
    return haar_from_normals(randomness.standard_normal(4))


class ReplayRandom:
    """RandomSource that hands out a fixed sequence of uniforms."""

    def __init__(self, draws: Iterable[float]):
        self._draws = iter(draws)

    def random(self) -> float:
        return float(next(self._draws))


@dataclass(frozen=True)
class TrialSummary:
    protocol: str
    n_trials: int
    seed: int
    counts: dict[str, int]
    empirical_frequencies: dict[str, float]
    standard_errors: dict[str, float]
    success_rate: float
    success_std_err: float
    mean_success_fidelity: float

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "n_trials": self.n_trials,
            "seed": self.seed,
            "counts": dict(self.counts),
            "empirical_frequencies": dict(self.empirical_frequencies),
            "standard_errors": dict(self.standard_errors),
            "success_rate": self.success_rate,
            "success_std_err": self.success_std_err,
            "mean_success_fidelity": self.mean_success_fidelity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrialSummary":
        fields = dict(data)
        if fields.get("mean_success_fidelity") is None:
            fields["mean_success_fidelity"] = float("nan")
        return cls(**fields)


def _streams(seed: int, n_trials: int, draws: int, haar: bool):
    meas, inputs = np.random.SeedSequence(seed).spawn(2)
    uniforms = np.random.default_rng(meas).random((n_trials, draws))
    normals = np.random.default_rng(inputs).standard_normal((n_trials, 4)) if haar else None
    return uniforms, normals


def binomial_std_err(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def monte_carlo(
    protocol: str,
    channel: ChannelSpec,
    inp: InputChoice,
    n_trials: int,
    seed: int,
) -> TrialSummary:
    """Run ``n_trials`` seeded protocol executions and tally the branches.

    Trial ``i`` consumes row ``i`` of a uniform array (and of a Gaussian array
    for Haar inputs) drawn from ``seed``, so results do not depend on how
    trials are scheduled. With a fixed input every trial sees the same
    outcome distributions; trials are then resolved in bulk with the same
    inverse-CDF rule a single run applies, and one real run per distinct
    branch supplies Bob's state.
    """
    labels = outcome_labels(protocol)
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    haar = isinstance(inp, str)
    if haar and inp != HAAR:
        raise ValueError(f"input must be an InputQubit or {HAAR!r}")
    probe = DEFAULT_INPUT if haar else inp
    draws = outcome_tree(protocol, probe, channel).draws
    uniforms, normals = _streams(seed, n_trials, draws, haar)

    counts = dict.fromkeys(labels, 0)
    fid_sum = 0.0
    n_success = 0
    if haar:
        for i in range(n_trials):
            trial_input = haar_from_normals(normals[i])
            rec = run_protocol(protocol, trial_input, channel, ReplayRandom(uniforms[i]))
            counts[rec.outcome_label] += 1
            if rec.success:
                n_success += 1
                fid_sum += rec.fidelity_with(trial_input)
    else:
        tree = outcome_tree(protocol, inp, channel)
        first = inverse_cdf(tree.first, uniforms[:, 0])
        second = np.full(n_trials, -1)
        for k, probs in tree.second.items():
            mask = first == k
            if mask.any():
                second[mask] = inverse_cdf(probs, uniforms[mask, 1])
        codes = first * 16 + (second + 1)
        unique, rep, freq = np.unique(codes, return_index=True, return_counts=True)
        for code, i, c in zip(unique, rep, freq):
            k, j = divmod(int(code), 16)
            path = (k,) if j == 0 else (k, j - 1)
            rec = run_protocol(protocol, inp, channel, ReplayRandom(uniforms[i]))
            if rec.outcome_label != tree.labels[path]:
                raise RuntimeError(
                    f"replayed run landed on {rec.outcome_label!r}, expected {tree.labels[path]!r}"
                )
            counts[rec.outcome_label] += int(c)
            if rec.success:
                n_success += int(c)
                fid_sum += int(c) * rec.fidelity_with(inp)

    freqs = {k: v / n_trials for k, v in counts.items()}
    success_rate = n_success / n_trials
    return TrialSummary(
        protocol=protocol,
        n_trials=n_trials,
        seed=seed,
        counts=counts,
        empirical_frequencies=freqs,
        standard_errors={k: binomial_std_err(f, n_trials) for k, f in freqs.items()},
        success_rate=success_rate,
        success_std_err=binomial_std_err(success_rate, n_trials),
        mean_success_fidelity=fid_sum / n_success if n_success else float("nan"),
    )


@dataclass(frozen=True)
class SweepRow:
    alpha_sq: float
    beta_sq: float
    analytic_success: float
    empirical_success: float
    std_err: float
    conclusive_within_subspace: float
    mean_success_fidelity: float


SWEEP_COLUMNS = tuple(SweepRow.__dataclass_fields__)


def sweep_alpha(
    grid: Sequence[float],
    protocol: str = QUBIT_ASSISTED,
    n_trials: int = 100_000,
    seed: int = 42,
    inp: InputChoice = DEFAULT_INPUT,
) -> list[SweepRow]:
    """Analytic and sampled success probability across channel strengths.

    Every row reuses ``seed`` (common random numbers), which keeps the
    empirical curve as smooth as the analytic one.
    """
    for x in grid:
        if not 0.5 <= x <= 1.0:
            raise ValueError(f"grid value {x!r} outside [0.5, 1]: alpha_sq must lie in [0.5, 1]")
    rows = []
    for x in grid:
        channel = ChannelSpec.from_alpha_sq(x)
        summary = monte_carlo(protocol, channel, inp, n_trials, seed)
        rows.append(SweepRow(
            alpha_sq=float(x),
            beta_sq=channel.beta_sq,
            analytic_success=analytic_success(protocol, channel),
            empirical_success=summary.success_rate,
            std_err=summary.success_std_err,
            conclusive_within_subspace=conclusive_within_subspace(channel),
            mean_success_fidelity=summary.mean_success_fidelity,
        ))
    return rows
