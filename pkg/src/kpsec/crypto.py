"""Cyclic-group keying primitives.

Everything the protocol needs is expressed over an abstract prime-order
cyclic group written additively: scalar multiplication, the group
operation, and a fixed-width element codec. Two instantiations ship here,
a tiny Schnorr-style subgroup of Z_467^* for fast exhaustive testing and
secp256k1 for realistic byte counts.

On top of the group: key pairs y = x*G, commutative pairwise secrets
x_a*y_b = x_b*y_a hashed into symmetric keys, Schnorr-style signatures
with nonces derived deterministically from (x, message), an ElGamal-style
hybrid public-key cipher, and an authenticated symmetric cipher (AES-GCM).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .sharing import _is_probable_prime


class AuthenticationError(Exception):
    """Ciphertext failed authentication: tampering or a wrong key."""


SYM_TAG_BYTES = 16
SYM_NONCE_BYTES = 12
_ASYM_NONCE = b"\x00" * SYM_NONCE_BYTES  # safe: every KEM key is single-use


def _hash(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


class SchnorrGroup:
    """Prime-order subgroup of Z_p^*, written additively.

    "Scalar multiplication" is modular exponentiation and the group
    operation is modular multiplication. Elements are validated to lie in
    the order-r subgroup on decode.
    """

    def __init__(self, p: int, generator: int, order: int):
        if not _is_probable_prime(p):
            raise ValueError("p must be prime")
        if not _is_probable_prime(order):
            raise ValueError("group order must be prime")
        if not 1 < generator < p:
            raise ValueError("generator out of range")
        if pow(generator, order, p) != 1:
            raise ValueError("generator does not have the stated order")
        self.p = p
        self.generator = generator
        self.order = order
        self.element_width = (p.bit_length() + 7) // 8
        self.scalar_width = (order.bit_length() + 7) // 8
        self.name = f"schnorr-{p.bit_length()}bit"

    @property
    def identity(self) -> int:
        return 1

    def is_element(self, e) -> bool:
        return isinstance(e, int) and 0 < e < self.p and pow(e, self.order, self.p) == 1

    def multiply(self, element: int, scalar: int) -> int:
        return pow(element, scalar % self.order, self.p)

    def combine(self, a: int, b: int) -> int:
        return a * b % self.p

    def encode(self, element: int) -> bytes:
        return int(element).to_bytes(self.element_width, "big")

    def decode(self, data: bytes) -> int:
        if len(data) != self.element_width:
            raise ValueError("bad element width")
        e = int.from_bytes(data, "big")
        if not self.is_element(e):
            raise ValueError("not a subgroup element")
        return e


# 467 is prime, 466 = 2 * 233; 4 = 2^2 is a quadratic residue generating the
# order-233 subgroup
TOY_GROUP = SchnorrGroup(p=467, generator=4, order=233)

_SECP_P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
_SECP_N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_SECP_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_SECP_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8


class Secp256k1Group:
    """secp256k1 (y^2 = x^3 + 7 over F_p, cofactor 1, 256-bit prime order).

    Points are affine (x, y) tuples, None is the identity. Encoding is the
    33-byte compressed form.
    """

    def __init__(self):
        self.p = _SECP_P
        self.order = _SECP_N
        self.generator = (_SECP_GX, _SECP_GY)
        self.element_width = 33
        self.scalar_width = 32
        self.name = "secp256k1"

    @property
    def identity(self):
        return None

    def is_element(self, e) -> bool:
        if e is None:
            return True
        if not (isinstance(e, tuple) and len(e) == 2):
            return False
        x, y = e
        return (0 <= x < self.p and 0 <= y < self.p
                and (y * y - (x * x * x + 7)) % self.p == 0)

    def _jadd(self, P1, P2):
        # Jacobian addition; inputs and output are (X, Y, Z), Z=0 encodes
        # the identity
        if P1[2] == 0:
            return P2
        if P2[2] == 0:
            return P1
        p = self.p
        X1, Y1, Z1 = P1
        X2, Y2, Z2 = P2
        Z1Z1 = Z1 * Z1 % p
        Z2Z2 = Z2 * Z2 % p
        U1 = X1 * Z2Z2 % p
        U2 = X2 * Z1Z1 % p
        S1 = Y1 * Z2 * Z2Z2 % p
        S2 = Y2 * Z1 * Z1Z1 % p
        H = (U2 - U1) % p
        r = (S2 - S1) % p
        if H == 0:
            if r == 0:
                return self._jdouble(P1)
            return (0, 1, 0)
        HH = H * H % p
        HHH = H * HH % p
        V = U1 * HH % p
        X3 = (r * r - HHH - 2 * V) % p
        Y3 = (r * (V - X3) - S1 * HHH) % p
        Z3 = Z1 * Z2 % p * H % p
        return (X3, Y3, Z3)

    def _jdouble(self, P1):
        p = self.p
        X1, Y1, Z1 = P1
        if Z1 == 0 or Y1 == 0:
            return (0, 1, 0)
        A = X1 * X1 % p
        B = Y1 * Y1 % p
        C = B * B % p
        D = 2 * ((X1 + B) * (X1 + B) - A - C) % p
        E = 3 * A % p
        F = E * E % p
        X3 = (F - 2 * D) % p
        Y3 = (E * (D - X3) - 8 * C) % p
        Z3 = 2 * Y1 * Z1 % p
        return (X3, Y3, Z3)

    def _to_affine(self, P1):
        X, Y, Z = P1
        if Z == 0:
            return None
        zinv = pow(Z, self.p - 2, self.p)
        zinv2 = zinv * zinv % self.p
        return (X * zinv2 % self.p, Y * zinv2 % self.p * zinv % self.p)

    def multiply(self, element, scalar: int):
        k = scalar % self.order
        if element is None or k == 0:
            return None
        acc = (0, 1, 0)
        base = (element[0], element[1], 1)
        for bit in bin(k)[2:]:
            acc = self._jdouble(acc)
            if bit == "1":
                acc = self._jadd(acc, base)
        return self._to_affine(acc)

    def combine(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        res = self._jadd((a[0], a[1], 1), (b[0], b[1], 1))
        return self._to_affine(res)

    def encode(self, element) -> bytes:
        if element is None:
            raise ValueError("identity has no encoding")
        x, y = element
        prefix = b"\x03" if y & 1 else b"\x02"
        return prefix + x.to_bytes(32, "big")

    def decode(self, data: bytes):
        if len(data) != 33 or data[0] not in (2, 3):
            raise ValueError("bad point encoding")
        x = int.from_bytes(data[1:], "big")
        if x >= self.p:
            raise ValueError("x outside the base field")
        rhs = (x * x * x + 7) % self.p
        y = pow(rhs, (self.p + 1) // 4, self.p)  # p = 3 mod 4
        if y * y % self.p != rhs:
            raise ValueError("x is not on the curve")
        if (y & 1) != (data[0] & 1):
            y = self.p - y
        return (x, y)


SECP256K1 = Secp256k1Group()


@dataclass(frozen=True)
class KeyPair:
    x: int  # private scalar
    y: object  # public element x*G


@dataclass(frozen=True)
class PairwiseKey:
    element: object
    key: bytes  # 32-byte symmetric key


def keygen(group, rng: random.Random) -> KeyPair:
    x = rng.randrange(1, group.order)
    return KeyPair(x=x, y=group.multiply(group.generator, x))


def derive_pairwise(group, x_self: int, y_peer) -> PairwiseKey:
    """Commutative pairwise secret: hash of the canonical encoding of
    x_self * y_peer."""
    if not group.is_element(y_peer) or y_peer is group.identity or y_peer == group.identity:
        raise ValueError("peer key is not a usable group element")
    element = group.multiply(y_peer, x_self)
    return PairwiseKey(element=element, key=_hash(group.encode(element)))


def _scalar_from_hash(data: bytes, order: int) -> int:
    return int.from_bytes(data, "big") % order


def sign(group, x: int, message: bytes) -> bytes:
    """Schnorr-style signature (c, s) with a deterministic nonce from
    (x, message); both scalars are fixed-width big-endian."""
    w = group.scalar_width
    nonce = _scalar_from_hash(
        _hash(b"nonce", x.to_bytes(w, "big"), _hash(message)), group.order)
    if nonce == 0:
        nonce = 1
    y = group.multiply(group.generator, x)
    r_point = group.multiply(group.generator, nonce)
    c = _scalar_from_hash(
        _hash(group.encode(r_point), group.encode(y), message), group.order)
    s = (nonce + c * x) % group.order
    return c.to_bytes(w, "big") + s.to_bytes(w, "big")


def verify(group, y, message: bytes, signature: bytes) -> bool:
    """Never raises on malformed input, only returns False."""
    try:
        w = group.scalar_width
        if len(signature) != 2 * w:
            return False
        c = int.from_bytes(signature[:w], "big")
        s = int.from_bytes(signature[w:], "big")
        if c >= group.order or s >= group.order:
            return False
        if not group.is_element(y) or y == group.identity or y is None:
            return False
        # R' = s*G - c*y; honest signatures never land on the identity
        r_point = group.combine(
            group.multiply(group.generator, s),
            group.multiply(y, (group.order - c) % group.order))
        if r_point is None or r_point == group.identity:
            return False
        expected = _scalar_from_hash(
            _hash(group.encode(r_point), group.encode(y), message), group.order)
        return expected == c
    except (ValueError, TypeError):
        return False


def asym_encrypt(group, y_recipient, plaintext: bytes, rng: random.Random) -> bytes:
    """Hybrid ElGamal-style encryption: fresh ephemeral scalar e, KEM key
    hash(e * y_recipient), payload sealed with AES-GCM. Layout is
    encode(e*G) || ciphertext; overhead is element_width + 16 bytes."""
    if not plaintext:
        raise ValueError("plaintext must be non-empty")
    if not group.is_element(y_recipient) or y_recipient == group.identity or y_recipient is None:
        raise ValueError("recipient key is not a usable group element")
    e = rng.randrange(1, group.order)
    epk = group.multiply(group.generator, e)
    kem_key = _hash(group.encode(group.multiply(y_recipient, e)))
    ct = AESGCM(kem_key).encrypt(_ASYM_NONCE, plaintext, None)
    return group.encode(epk) + ct


def asym_decrypt(group, x_recipient: int, blob: bytes) -> bytes:
    w = group.element_width
    if len(blob) < w + SYM_TAG_BYTES + 1:
        raise AuthenticationError("ciphertext too short")
    try:
        epk = group.decode(blob[:w])
    except ValueError as exc:
        raise AuthenticationError("bad ephemeral key encoding") from exc
    kem_key = _hash(group.encode(group.multiply(epk, x_recipient)))
    try:
        return AESGCM(kem_key).decrypt(_ASYM_NONCE, blob[w:], None)
    except InvalidTag as exc:
        raise AuthenticationError("asymmetric payload failed authentication") from exc


def asym_overhead(group) -> int:
    return group.element_width + SYM_TAG_BYTES


def _sym_key(key) -> bytes:
    raw = key.key if isinstance(key, PairwiseKey) else key
    if not isinstance(raw, bytes) or len(raw) != 32:
        raise ValueError("symmetric key must be 32 bytes")
    return raw


def _sym_nonce(nonce) -> bytes:
    if isinstance(nonce, int):
        return nonce.to_bytes(SYM_NONCE_BYTES, "big")
    if not isinstance(nonce, bytes) or len(nonce) != SYM_NONCE_BYTES:
        raise ValueError("nonce must be 12 bytes")
    return nonce


def sym_encrypt(key, plaintext: bytes, nonce) -> bytes:
    """Authenticated symmetric encryption; nonce uniqueness per key is the
    caller's contract."""
    return AESGCM(_sym_key(key)).encrypt(_sym_nonce(nonce), plaintext, None)


def sym_decrypt(key, ciphertext: bytes, nonce) -> bytes:
    try:
        return AESGCM(_sym_key(key)).decrypt(_sym_nonce(nonce), ciphertext, None)
    except InvalidTag as exc:
        raise AuthenticationError("symmetric payload failed authentication") from exc
