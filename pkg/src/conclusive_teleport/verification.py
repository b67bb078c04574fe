"""Acceptance checks for the qubit-assisted protocol.

Each check returns a :class:`CheckResult`; :func:`run_all` runs the lot.
They are shared by ``teleport-sim verify`` and the acceptance tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import (
    DEFAULT_INPUT,
    analytic_outcome_probs,
    haar_random_input,
    monte_carlo,
)
from .measurement import born_probabilities, build_idp_povm, validate_povm
from .protocols import (
    QA_LABELS,
    QUBIT_ASSISTED,
    ChannelSpec,
    InputQubit,
    build_phi_basis,
    build_projectors,
    enumerate_branches,
    enumerate_mor_horodecki,
    filter_povm,
    prepare_joint_state,
    subspace_states,
    success_probability,
)

ALPHA_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
EXACT = 1e-12
BRANCH = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag])


def _random_channel(rng: np.random.Generator) -> ChannelSpec:
    return ChannelSpec.from_alpha_sq(rng.uniform(0.5, 1.0))


def regrouped_joint_state(inp: InputQubit, channel: ChannelSpec) -> np.ndarray:
    """The four-qubit state rebuilt term by term from the Phi basis and Bob's
    four column vectors, without going through the product construction."""
    phi = [s.amplitudes for s in build_phi_basis().states]
    a, b = inp.a, inp.b
    a2, b2 = channel.alpha_sq, channel.beta_sq
    bob = {
        "ab": np.array([a, b]),
        "a-b": np.array([a, -b]),
        "ba": np.array([b, a]),
        "-ba": np.array([-b, a]),
    }
    half = 0.5 * (
        np.kron(a2 * phi[0] + b2 * phi[1], bob["ab"])
        + np.kron(a2 * phi[0] - b2 * phi[1], bob["a-b"])
        + np.kron(b2 * phi[2] + a2 * phi[3], bob["ba"])
        + np.kron(b2 * phi[2] - a2 * phi[3], bob["-ba"])
    )
    direct = channel.alpha * channel.beta / math.sqrt(2) * (
        np.kron(phi[4], bob["ab"])
        + np.kron(phi[5], bob["a-b"])
        + np.kron(phi[6], bob["ba"])
        + np.kron(phi[7], bob["-ba"])
    )
    return half + direct


def check_success_exact(seed: int = 42, quick: bool = False) -> CheckResult:
    rng = _rng(seed, 1)
    worst = 0.0
    for x in ALPHA_GRID:
        channel = ChannelSpec.from_alpha_sq(x)
        for _ in range(20):
            p = success_probability(enumerate_branches(haar_random_input(rng), channel))
            worst = max(worst, abs(p - 2 * channel.beta_sq))
    return CheckResult("1 total success = 2 beta^2 (exact tree)", worst <= EXACT,
                       f"max |p - 2b^2| = {worst:.2e} (tol {EXACT:g}, 6 alphas x 20 inputs)")


def check_success_sampled(seed: int = 42, quick: bool = False) -> CheckResult:
    n = 10_000 if quick else 1_000_000
    channel = ChannelSpec.from_alpha_sq(0.8)
    summary = monte_carlo(QUBIT_ASSISTED, channel, DEFAULT_INPUT, n, seed)
    target = 0.4
    sigma = math.sqrt(target * (1 - target) / n)
    dev = abs(summary.success_rate - target)
    return CheckResult("2 sampled success at alpha^2=0.8", dev <= 4 * sigma,
                       f"rate {summary.success_rate:.6f} vs 0.4, |dev| = {dev / sigma:.2f} sigma "
                       f"(sigma {sigma:.2e}, n {n}, seed {seed}, gate 4 sigma)")


def check_conclusive_povm(seed: int = 42, quick: bool = False) -> CheckResult:
    worst = 0.0
    for x in ALPHA_GRID:
        channel = ChannelSpec.from_alpha_sq(x)
        a4, b4 = channel.alpha_sq**2, channel.beta_sq**2
        printed = 1 - (a4 - b4) / (a4 + b4)
        for subspace in (1, 2):
            u_plus, u_minus = subspace_states(channel, subspace)
            povm = build_idp_povm(u_plus, u_minus)
            conclusive = povm.effects[0] + povm.effects[1]
            for u in (u_plus, u_minus):
                got = float(np.real(np.vdot(u.amplitudes, conclusive @ u.amplitudes)))
                worst = max(worst, abs(got - printed))
    return CheckResult("3 IDP conclusive probability = 2b^4/(a^4+b^4)", worst <= EXACT,
                       f"max deviation {worst:.2e} (tol {EXACT:g})")


def check_direct_outcomes(seed: int = 42, quick: bool = False) -> CheckResult:
    rng = _rng(seed, 4)
    worst = 0.0
    for x in ALPHA_GRID:
        channel = ChannelSpec.from_alpha_sq(x)
        expected = channel.alpha_sq * channel.beta_sq / 2
        for _ in range(100):
            records = enumerate_branches(haar_random_input(rng), channel)
            for r in records[:4]:
                worst = max(worst, abs(r.branch_probability - expected))
    return CheckResult("4 direct outcomes each a^2 b^2 / 2", worst < EXACT,
                       f"max deviation {worst:.2e} over 100 Haar inputs per alpha (tol {EXACT:g})")


def check_success_fidelity(seed: int = 42, quick: bool = False) -> CheckResult:
    rng = _rng(seed, 5)
    worst = 0.0
    n_branches = 0
    for _ in range(500):
        channel = _random_channel(rng)
        inp = haar_random_input(rng)
        for r in enumerate_branches(inp, channel):
            if r.success and r.bob_state is not None:
                n_branches += 1
                worst = max(worst, 1 - r.fidelity_with(inp))
    return CheckResult("5 success branches have fidelity 1", worst <= BRANCH,
                       f"max 1 - F = {worst:.2e} over {n_branches} branches (tol {BRANCH:g})")


def check_matches_mor_horodecki(seed: int = 42, quick: bool = False) -> CheckResult:
    rng = _rng(seed, 6)
    worst = 0.0
    for x in ALPHA_GRID:
        channel = ChannelSpec.from_alpha_sq(x)
        inp = haar_random_input(rng)
        ours = success_probability(enumerate_branches(inp, channel))
        theirs = success_probability(enumerate_mor_horodecki(inp, channel))
        worst = max(worst, abs(ours - theirs))
    return CheckResult("6 p = p_MH across the alpha grid", worst <= EXACT,
                       f"max |p - p_MH| = {worst:.2e} (tol {EXACT:g})")


def check_regrouping(seed: int = 42, quick: bool = False) -> CheckResult:
    rng = _rng(seed, 7)
    worst = 0.0
    for _ in range(100):
        channel = _random_channel(rng)
        inp = haar_random_input(rng)
        diff = regrouped_joint_state(inp, channel) - prepare_joint_state(inp, channel).amplitudes
        worst = max(worst, float(np.max(np.abs(diff))))
    return CheckResult("7 regrouped decomposition equals product state", worst <= EXACT,
                       f"max amplitude deviation {worst:.2e} over 100 draws (tol {EXACT:g})")


def check_structure(seed: int = 42, quick: bool = False) -> CheckResult:
    gram_err = float(np.max(np.abs(build_phi_basis().gram() - np.eye(8))))
    proj_err = float(np.max(np.abs(sum(build_projectors().matrices()) - np.eye(8))))
    povms = [filter_povm(ChannelSpec.from_alpha_sq(x)) for x in ALPHA_GRID]
    for x in ALPHA_GRID:
        channel = ChannelSpec.from_alpha_sq(x)
        povms += [build_idp_povm(*subspace_states(channel, s)) for s in (1, 2)]
    reports = [validate_povm(p) for p in povms]
    residual = max(r.completeness_residual for r in reports)
    min_eig = min(r.min_eigenvalue for r in reports)
    passed = gram_err <= EXACT and proj_err <= EXACT and residual < EXACT and min_eig >= -EXACT
    return CheckResult("8 basis, projector and POVM structure", passed,
                       f"gram {gram_err:.1e}, sum P {proj_err:.1e}, POVM residual {residual:.1e}, "
                       f"min eigenvalue {min_eig:.1e}")


def check_subspace_average(seed: int = 42, quick: bool = False) -> CheckResult:
    n = 10_000 if quick else 100_000
    rng = _rng(seed, 9)
    channel = ChannelSpec.from_alpha_sq(0.8)
    projectors = build_projectors()
    values = np.empty(n)
    for i in range(n):
        joint = prepare_joint_state(haar_random_input(rng), channel)
        values[i] = born_probabilities(joint, projectors)[0]
    target = (channel.alpha_sq**2 + channel.beta_sq**2) / 2
    se = float(values.std(ddof=1) / math.sqrt(n))
    dev = abs(float(values.mean()) - target)
    return CheckResult("9 Haar-averaged subspace-1 probability = (a^4+b^4)/2", dev <= 3 * se,
                       f"mean {values.mean():.6f} vs {target:.6f}, |dev| = {dev / se:.2f} SE "
                       f"(SE {se:.2e}, n {n}, gate 3 SE)")


def check_oracle_agreement(seed: int = 42, quick: bool = False) -> CheckResult:
    rng = _rng(seed, 10)
    worst = 0.0
    for _ in range(200):
        channel = _random_channel(rng)
        inp = haar_random_input(rng)
        analytic = analytic_outcome_probs(channel, inp).per_outcome
        for r in enumerate_branches(inp, channel):
            worst = max(worst, abs(analytic[r.outcome_label] - r.branch_probability))
    return CheckResult("10 closed forms agree with state-vector tree", worst <= BRANCH,
                       f"max deviation {worst:.2e} on {len(QA_LABELS)} branches x 200 configs "
                       f"(tol {BRANCH:g})")


CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_success_exact,
    check_success_sampled,
    check_conclusive_povm,
    check_direct_outcomes,
    check_success_fidelity,
    check_matches_mor_horodecki,
    check_regrouping,
    check_structure,
    check_subspace_average,
    check_oracle_agreement,
)


def run_all(seed: int = 42, quick: bool = False) -> list[CheckResult]:
    return [check(seed=seed, quick=quick) for check in CHECKS]
