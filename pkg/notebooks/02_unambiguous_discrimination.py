# %% [markdown]
# # Telling two nonorthogonal states apart without mistakes
#
# After a rank-2 outcome Alice's logical qubit sits in one of two states
# whose overlap depends only on the channel. The optimal error-free
# measurement has three outcomes: "plus", "minus" and "don't know".

# %%
import numpy as np

from conclusive_teleport import ChannelSpec, build_idp_povm, validate_povm
from conclusive_teleport.protocols import subspace_states

channel = ChannelSpec.from_alpha_sq(0.8)
u_plus, u_minus = subspace_states(channel, 1)
overlap = abs(np.vdot(u_plus.amplitudes, u_minus.amplitudes))
print("overlap s =", overlap)

povm = build_idp_povm(u_plus, u_minus)
report = validate_povm(povm)
print("completeness residual:", report.completeness_residual, " min eigenvalue:", report.min_eigenvalue)

# %% [markdown]
# The conclusive outcomes never fire on the wrong state.

# %%
for name, state in (("u+", u_plus), ("u-", u_minus)):
    probs = [float(np.real(np.vdot(state.amplitudes, e @ state.amplitudes))) for e in povm.effects]
    print(name, dict(zip(povm.labels, np.round(probs, 12))))

# %% [markdown]
# Success per state equals 1 - s. Written in channel parameters that is
# 2 beta^4 / (alpha^4 + beta^4).

# %%
print(f"{'alpha^2':>8} {'1 - s':>10} {'closed form':>12}")
for a2 in np.linspace(0.5, 1.0, 6):
    ch = ChannelSpec.from_alpha_sq(a2)
    p, m = subspace_states(ch, 1)
    s = abs(np.vdot(p.amplitudes, m.amplitudes))
    closed = 2 * ch.beta_sq**2 / (ch.alpha_sq**2 + ch.beta_sq**2)
    print(f"{a2:8.2f} {1 - s:10.6f} {closed:12.6f}")
