# %% [markdown]
# # One run, then every branch
#
# A single seeded run of the qubit-assisted protocol, followed by the full
# outcome tree with probabilities, corrections and fidelities.

# %%
import numpy as np

from conclusive_teleport import (
    ChannelSpec,
    InputQubit,
    encode_classical_message,
    enumerate_branches,
    run_qubit_assisted,
)
from conclusive_teleport.protocols import enumerate_bbcjpw, enumerate_mor_horodecki

channel = ChannelSpec.from_alpha_sq(0.7)
inp = InputQubit(0.6, 0.8j)

record = run_qubit_assisted(inp, channel, np.random.default_rng(3))
print(record.outcome_label, record.correction, "message:", encode_classical_message(record))
if record.success:
    print("fidelity:", record.fidelity_with(inp))

# %%
print(f"{'branch':<16}{'prob':>10}  {'correction':<16}{'fidelity':>10}")
branches = enumerate_branches(inp, channel)
for r in branches:
    fid = r.fidelity_with(inp) if r.success and r.bob_state is not None else float("nan")
    print(f"{r.outcome_label:<16}{r.branch_probability:10.6f}  {r.correction:<16}{fid:10.6f}")
print("success:", sum(r.branch_probability for r in branches if r.success), " 2 beta^2 =", 2 * channel.beta_sq)

# %% [markdown]
# The two reference protocols on the same input. With a maximally entangled
# pair the standard scheme always works; filtering the weak pair first
# gives exactly the same success as the qubit-assisted route.

# %%
bb = enumerate_bbcjpw(inp)
mh = enumerate_mor_horodecki(inp, channel)
print("standard, ideal pair:", sum(r.branch_probability for r in bb if r.success))
print("filter then Bell:    ", sum(r.branch_probability for r in mh if r.success))
