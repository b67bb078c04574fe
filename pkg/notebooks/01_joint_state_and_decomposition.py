# %% [markdown]
# # The four-qubit starting state
#
# Alice holds an unknown qubit a|0> + b|1>, an ancilla prepared as
# alpha|0> + beta|1>, and her half of the partially entangled pair
# alpha|00> + beta|11>. Bob holds the other half. This script builds that
# state, introduces the eight-vector basis on Alice's three qubits and
# checks that re-writing the state in that basis loses nothing.

# %%
import numpy as np

from conclusive_teleport import ChannelSpec, InputQubit, build_phi_basis, prepare_joint_state
from conclusive_teleport.measurement import born_probabilities
from conclusive_teleport.protocols import build_projectors
from conclusive_teleport.statevec import split_qubits
from conclusive_teleport.verification import regrouped_joint_state

channel = ChannelSpec.from_alpha_sq(0.8)
inp = InputQubit(0.6, 0.8)
joint = prepare_joint_state(inp, channel)
print("qubits:", joint.num_qubits, " norm^2:", joint.norm_sq())

# %% [markdown]
# Nonzero amplitudes, indexed with qubit 0 (the input) as the most significant bit.

# %%
for index in np.flatnonzero(np.abs(joint.amplitudes) > 1e-15):
    print(f"|{index:04b}>  {joint.amplitudes[index].real:+.6f}")

# %% [markdown]
# ## The basis on Alice's side
#
# Four product vectors plus two GHZ-like pairs. The Gram matrix should be the identity.

# %%
basis = build_phi_basis()
print("max |G - I| =", np.abs(basis.gram() - np.eye(8)).max())

# %% [markdown]
# Projecting Alice's three qubits onto each basis vector leaves Bob with a
# (subnormalised) qubit. Summing the pieces back up reproduces the original state.

# %%
regrouped = regrouped_joint_state(inp, channel)
print("regrouping error:", np.abs(regrouped - joint.amplitudes).max())

alice_bob = split_qubits(joint.amplitudes, (0, 1, 2))
for k, phi in enumerate(basis.states, start=1):
    bob = phi.amplitudes.conj() @ alice_bob
    print(f"Phi{k}: Bob holds ({bob[0].real:+.4f}, {bob[1].real:+.4f})")

# %% [markdown]
# Outcome probabilities of the six-element projective measurement. The first
# two are rank 2 and absorb most of the weight when the channel is weak.

# %%
probs = born_probabilities(joint, build_projectors())
for name, p in zip(["P1", "P2", "P3", "P4", "P5", "P6"], probs):
    print(f"{name}: {p:.6f}")
print("sum:", sum(probs))
