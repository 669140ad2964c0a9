# %% [markdown]
# # Implicit certificates
#
# A device never receives its public key from the CA. It receives a
# 101-byte certificate and a value `r`, and anyone holding the CA's public
# key can rebuild the device's key from the certificate alone.

# %%
import random

from ecqvkd.ecqv import CaState, ca_issue, cert_receive, cert_request, derive_public_key

rng = random.Random(1)
ca = CaState.create(b"DEMO-CA-00000000", rng)

# %% [markdown]
# The device commits to a secret `k` by sending `R = k*G` with its name.

# %%
request = cert_request(b"BATTERY-MODULE-1", rng)
cert, r = ca_issue(ca, request, validity=(0, 2**31), rng=rng)
print(len(cert.encode()), "byte certificate, serial", cert.serial)

# %% [markdown]
# The device turns `(k, cert, r)` into its private key and checks it.
# A peer only needs the certificate.

# %%
me = cert_receive(request.secret, cert, r, ca.public_key)
peer_view = derive_public_key(cert.encode(), ca.public_key)
print("peer reconstructs the same key:", peer_view == me.public_key)

# %% [markdown]
# Flip one byte on the way from the CA and the device notices.

# %%
damaged = bytearray(cert.encode())
damaged[40] ^= 1
try:
    cert_receive(request.secret, bytes(damaged), r, ca.public_key)
except ValueError as exc:
    print("rejected:", exc)
