# %% [markdown]
# # Four ways to agree on a key
#
# STS uses fresh ephemeral keys each time. S-ECDSA, SCIANC and PORAMB
# multiply long-term keys, so their premaster secret is fixed for the
# lifetime of the certificates.

# %%
from ecqvkd import ProtocolKind, run_handshake
from ecqvkd.analysis import overhead_table, render_overhead

for kind in ProtocolKind:
    result = run_handshake(kind, seed=7)
    ledger = result.channel.ledger
    print(f"{kind.value:<12} {ledger.steps} steps {ledger.app_bytes:4d} B "
          f"{ledger.frames:2d} frames  {ledger.latency * 1e3:.2f} ms on the bus  ok={result.ok}")

# %% [markdown]
# Per-frame view of one STS run over the simulated CAN-FD link.

# %%
print(run_handshake(ProtocolKind.STS, seed=7).channel.ledger.render())

# %% [markdown]
# The overhead table is produced by encoding real messages.

# %%
print(render_overhead(overhead_table()))
