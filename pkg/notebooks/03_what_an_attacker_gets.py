# %% [markdown]
# # What an attacker gets
#
# Record a handshake, steal the long-term keys later, try to decrypt.

# %%
from ecqvkd import ProtocolKind
from ecqvkd.analysis import compromise_run, key_reuse_probe, threat_matrix

for kind in (ProtocolKind.S_ECDSA, ProtocolKind.SCIANC, ProtocolKind.PORAMB, ProtocolKind.STS):
    outcome = compromise_run(kind, seed=3)
    print(f"{kind.value:<8} recovered={outcome.matches!s:<5} {outcome.recovery.note}")

# %% [markdown]
# Same two certificates, twenty sessions: how many different premasters?

# %%
for kind in (ProtocolKind.STS, ProtocolKind.SCIANC):
    probe = key_reuse_probe(kind, 20)
    print(kind.value, probe.premaster_distinct, "premasters,", probe.session_distinct, "session keys")

# %% [markdown]
# The whole security overview. Starred cells keep the published rating.

# %%
print(threat_matrix(scenarios=3).render().split("\n\n")[0])
