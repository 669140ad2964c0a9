"""ECQV implicit certificates and the key-derivation handshakes built on them.

The package is organised like a small numerical library:

``ecqvkd.crypto``
    P-256 arithmetic, ECDSA, HKDF and the symmetric primitives.
``ecqvkd.ecqv``
    Certificate issuance, reception and public-key reconstruction.
``ecqvkd.protocols``
    STS (with its two overlapped schedules), S-ECDSA, SCIANC and PORAMB
    as message-driven session objects.
``ecqvkd.transport``
    CAN-FD / ISO-TP style channel with byte accounting and attacker hooks.
``ecqvkd.analysis``
    Timing algebra, transmission overhead, benchmarks and attack oracles.
"""

from .protocols import ProtocolKind
from .simulation import Deployment, HandshakeResult, provision, run_handshake

__version__ = "0.1.0"

__all__ = ["Deployment", "HandshakeResult", "ProtocolKind", "provision", "run_handshake", "__version__"]
