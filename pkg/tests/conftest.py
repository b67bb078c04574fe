import numpy as np
import pytest
from hypothesis import strategies as st

from conclusive_teleport.protocols import ChannelSpec, InputQubit


def brute_force_joint(a, b, alpha, beta):
    """Amplitudes of input (x) ancilla (x) channel pair by explicit bit loops."""
    inp = {0: a, 1: b}
    anc = {0: alpha, 1: beta}
    pair = {(0, 0): alpha, (1, 1): beta}
    amps = np.zeros(16, dtype=complex)
    for q0 in (0, 1):
        for q1 in (0, 1):
            for qa in (0, 1):
                for qb in (0, 1):
                    idx = (q0 << 3) | (q1 << 2) | (qa << 1) | qb
                    amps[idx] = inp[q0] * anc[q1] * pair.get((qa, qb), 0.0)
    return amps


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def random_input(rng) -> InputQubit:
    z = rng.standard_normal(4)
    return InputQubit.normalized(complex(z[0], z[1]), complex(z[2], z[3]))


def random_channel(rng) -> ChannelSpec:
    return ChannelSpec.from_alpha_sq(rng.uniform(0.5, 1.0))


alpha_sqs = st.floats(min_value=0.5, max_value=1.0, allow_nan=False)


@st.composite
def inputs(draw):
    parts = [draw(st.floats(-1, 1, allow_nan=False)) for _ in range(4)]
    norm = np.sqrt(sum(p * p for p in parts))
    if norm < 1e-3:
        parts, norm = [1.0, 0.0, 0.0, 0.0], 1.0
    return InputQubit.normalized(complex(parts[0], parts[1]), complex(parts[2], parts[3]))
