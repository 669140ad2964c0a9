"""NIST P-256 (secp256r1) group arithmetic.

Points are affine and immutable; the identity is ``INFINITY``.  Scalar
multiplication runs in Jacobian coordinates with a fixed 4-bit window,
and :func:`mul_add` evaluates ``a*P + b*Q`` with Shamir's trick (one shared
doubling chain), which is what ECDSA verification and the fused static DH
use.
"""

from __future__ import annotations

from dataclasses import dataclass

P = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
A = P - 3
B = 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B
N = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
GX = 0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296
GY = 0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5

SCALAR_LEN = 32
RAW_POINT_LEN = 64
COMPRESSED_POINT_LEN = 33


class InvalidPointError(ValueError):
    """Coordinates or an encoding that do not describe a P-256 point."""


@dataclass(frozen=True)
class Point:
    x: int
    y: int
    infinity: bool = False

    def __post_init__(self):
        if not self.infinity and not is_on_curve(self.x, self.y):
            raise InvalidPointError("point is not on P-256")

    def __bool__(self) -> bool:
        return not self.infinity

    def __neg__(self) -> Point:
        if self.infinity:
            return self
        return Point(self.x, (-self.y) % P)

    def __add__(self, other: Point) -> Point:
        return _to_affine(_jadd(_to_jac(self), _to_jac(other)))

    def __rmul__(self, k: int) -> Point:
        return mul(k, self)

    def raw(self) -> bytes:
        """64-byte ``x || y`` encoding, no prefix byte."""
        if self.infinity:
            raise InvalidPointError("identity has no raw encoding")
        return self.x.to_bytes(32, "big") + self.y.to_bytes(32, "big")

    def compressed(self) -> bytes:
        if self.infinity:
            raise InvalidPointError("identity has no compressed encoding")
        return bytes([2 | (self.y & 1)]) + self.x.to_bytes(32, "big")

    @classmethod
    def from_raw(cls, data: bytes) -> Point:
        if len(data) != RAW_POINT_LEN:
            raise InvalidPointError(f"raw point must be 64 bytes, got {len(data)}")
        x = int.from_bytes(data[:32], "big")
        y = int.from_bytes(data[32:], "big")
        if x >= P or y >= P:
            raise InvalidPointError("coordinate out of range")
        return cls(x, y)

    @classmethod
    def from_compressed(cls, data: bytes) -> Point:
        if len(data) != COMPRESSED_POINT_LEN or data[0] not in (2, 3):
            raise InvalidPointError("bad compressed point encoding")
        x = int.from_bytes(data[1:], "big")
        if x >= P:
            raise InvalidPointError("coordinate out of range")
        rhs = (x * x * x + A * x + B) % P
        # P = 3 mod 4, so the square root is a single exponentiation
        y = pow(rhs, (P + 1) // 4, P)
        if y * y % P != rhs:
            raise InvalidPointError("x has no point on P-256")
        if (y & 1) != (data[0] & 1):
            y = P - y
        return cls(x, y)


def is_on_curve(x: int, y: int) -> bool:
    if not (0 <= x < P and 0 <= y < P):
        return False
    return (y * y - (x * x * x + A * x + B)) % P == 0


INFINITY = Point(0, 0, infinity=True)
G = Point(GX, GY)


# Jacobian coordinates: (X, Y, Z) <-> (X/Z^2, Y/Z^3); Z == 0 is the identity.

_JINF = (1, 1, 0)


def _to_jac(pt: Point):
    return _JINF if pt.infinity else (pt.x, pt.y, 1)


def _to_affine(jp) -> Point:
    X, Y, Z = jp
    if Z == 0:
        return INFINITY
    zi = pow(Z, -1, P)
    zi2 = zi * zi % P
    return Point(X * zi2 % P, Y * zi2 * zi % P)


def _jdouble(jp):
    X, Y, Z = jp
    if Z == 0 or Y == 0:
        return _JINF
    # a = -3 shortcut: M = 3(X - Z^2)(X + Z^2)
    zz = Z * Z % P
    m = 3 * (X - zz) * (X + zz) % P
    yy = Y * Y % P
    s = 4 * X * yy % P
    x3 = (m * m - 2 * s) % P
    y3 = (m * (s - x3) - 8 * yy * yy) % P
    z3 = 2 * Y * Z % P
    return (x3, y3, z3)


def _jadd(p1, p2):
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    if Z1 == 0:
        return p2
    if Z2 == 0:
        return p1
    z1z1 = Z1 * Z1 % P
    z2z2 = Z2 * Z2 % P
    u1 = X1 * z2z2 % P
    u2 = X2 * z1z1 % P
    s1 = Y1 * Z2 * z2z2 % P
    s2 = Y2 * Z1 * z1z1 % P
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    if h == 0:
        if r == 0:
            return _jdouble(p1)
        return _JINF
    hh = h * h % P
    hhh = h * hh % P
    v = u1 * hh % P
    x3 = (r * r - hhh - 2 * v) % P
    y3 = (r * (v - x3) - s1 * hhh) % P
    z3 = h * Z1 * Z2 % P
    return (x3, y3, z3)


def _window_table(jp, size=16):
    table = [_JINF, jp]
    for _ in range(2, size):
        table.append(_jadd(table[-1], jp))
    return table


def mul(k: int, pt: Point) -> Point:
    """Return ``k * pt``; ``k`` is reduced modulo the group order."""
    k %= N
    if k == 0 or pt.infinity:
        return INFINITY
    table = _window_table(_to_jac(pt))
    acc = _JINF
    for shift in range((k.bit_length() + 3) // 4 * 4 - 4, -4, -4):
        acc = _jdouble(_jdouble(_jdouble(_jdouble(acc))))
        nib = (k >> shift) & 0xF
        if nib:
            acc = _jadd(acc, table[nib])
    return _to_affine(acc)


def mul_add(a: int, p1: Point, b: int, p2: Point) -> Point:
    """Return ``a*p1 + b*p2`` using one interleaved double-and-add chain."""
    a %= N
    b %= N
    j1, j2 = _to_jac(p1), _to_jac(p2)
    both = _jadd(j1, j2)
    acc = _JINF
    for i in range(max(a.bit_length(), b.bit_length()) - 1, -1, -1):
        acc = _jdouble(acc)
        bits = ((a >> i) & 1) | (((b >> i) & 1) << 1)
        if bits == 1:
            acc = _jadd(acc, j1)
        elif bits == 2:
            acc = _jadd(acc, j2)
        elif bits == 3:
            acc = _jadd(acc, both)
    return _to_affine(acc)


def base_mul(k: int) -> Point:
    return mul(k, G)
