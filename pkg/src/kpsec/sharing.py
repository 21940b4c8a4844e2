"""Threshold sharing over a prime field.

A secret becomes the constant term of a random polynomial of degree
threshold-1; shares are evaluations at the indices 1..rho. Any threshold
shares with distinct indices rebuild the constant term through Lagrange
interpolation at zero; fewer reveal nothing. Byte-string secrets wider
than the field are cut into fixed-width chunks that all reuse the same
index space, so one set of Lagrange multipliers serves every chunk.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

DEFAULT_PRIME = 2**256 - 189


class InsufficientSharesError(ValueError):
    """Fewer distinct share indices than the reconstruction threshold."""


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # deterministic for 64-bit inputs, overwhelming confidence beyond
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """Arithmetic mod a prime q, with operation counters for cost checks.

    element_bytes is the fixed serialization width; chunk_bytes is how many
    payload bytes one element can always carry (one bit of headroom).
    """

    __slots__ = ("q", "element_bytes", "chunk_bytes", "mul_ops", "inv_ops")

    def __init__(self, q: int):
        if not _is_probable_prime(q):
            raise ValueError("field modulus must be prime")
        self.q = q
        self.element_bytes = (q.bit_length() + 7) // 8
        self.chunk_bytes = (q.bit_length() - 1) // 8
        self.mul_ops = 0
        self.inv_ops = 0

    def reduce(self, a: int) -> int:
        return a % self.q

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        self.mul_ops += 1
        return a * b % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroDivisionError("no inverse of zero")
        self.inv_ops += 1
        return pow(a, -1, self.q)

    def rand_element(self, rng: random.Random) -> int:
        return rng.randrange(self.q)

    def __repr__(self) -> str:
        return f"PrimeField(bits={self.q.bit_length()})"


@dataclass(frozen=True)
class SharePolynomial:
    """Coefficients low-to-high; coefficients[0] is the secret."""
    coefficients: tuple[int, ...]

    @property
    def threshold(self) -> int:
        return len(self.coefficients)

    def evaluate(self, field: PrimeField, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = field.add(field.mul(acc, x), c)
        return acc


@dataclass(frozen=True)
class Share:
    """One evaluation point. value holds one field element per chunk of the
    encoded secret (a single element for scalar secrets)."""
    index: int
    value: tuple[int, ...]
    signature: bytes = b""


def make_polynomial(secret: int, threshold: int, field: PrimeField,
                    rng: random.Random) -> SharePolynomial:
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    if not 0 <= secret < field.q:
        raise ValueError("secret out of field range")
    coeffs = (secret,) + tuple(field.rand_element(rng) for _ in range(threshold - 1))
    return SharePolynomial(coefficients=coeffs)


def eval_shares(poly: SharePolynomial, rho: int, field: PrimeField) -> list[Share]:
    """Unsigned shares at indices 1..rho (never 0, which would leak the secret)."""
    if rho < poly.threshold:
        raise InsufficientSharesError("rho below threshold makes reconstruction impossible")
    if rho >= field.q:
        raise ValueError("rho must stay below the field modulus")
    return [Share(index=i, value=(poly.evaluate(field, i),)) for i in range(1, rho + 1)]


def lagrange_coefficients(indices, field: PrimeField) -> list[int]:
    """Multipliers l_i with sum(P(i) * l_i) = P(0), in the order given.

    l_i = prod_{j != i} (0 - j) / (i - j) mod q.
    """
    idx = [i % field.q for i in indices]
    if len(set(idx)) != len(idx):
        raise ValueError("share indices must be distinct")
    if any(i == 0 for i in idx):
        raise ValueError("index 0 is reserved for the secret")
    coeffs = []
    for i in idx:
        num, den = 1, 1
        for j in idx:
            if j == i:
                continue
            num = field.mul(num, field.sub(0, j))
            den = field.mul(den, field.sub(i, j))
        coeffs.append(field.mul(num, field.inv(den)))
    return coeffs


def reconstruct(shares, threshold: int, field: PrimeField) -> tuple[int, ...]:
    """Rebuild the secret chunks from the lowest `threshold` distinct indices.

    Raises InsufficientSharesError when fewer distinct indices are present,
    ValueError when chunk counts disagree.
    """
    by_index: dict[int, Share] = {}
    for sh in shares:
        by_index.setdefault(sh.index, sh)
    if len(by_index) < threshold:
        raise InsufficientSharesError(
            f"{len(by_index)} distinct shares, need {threshold}")
    chosen = [by_index[i] for i in sorted(by_index)[:threshold]]
    chunks = len(chosen[0].value)
    if any(len(sh.value) != chunks for sh in chosen):
        raise ValueError("shares carry different chunk counts")
    coeffs = lagrange_coefficients([sh.index for sh in chosen], field)
    out = []
    for c in range(chunks):
        acc = 0
        for sh, l in zip(chosen, coeffs):
            acc = field.add(acc, field.mul(sh.value[c], l))
        out.append(acc)
    return tuple(out)


def bytes_to_elements(data: bytes, field: PrimeField) -> tuple[int, ...]:
    """Length-prefixed chunking into field elements; inverse of
    elements_to_bytes."""
    if field.chunk_bytes < 1:
        raise ValueError("field too small to carry bytes")
    if len(data) >= 2**32:
        raise ValueError("secret too large")
    framed = len(data).to_bytes(4, "big") + data
    w = field.chunk_bytes
    pad = (-len(framed)) % w
    framed += b"\x00" * pad
    return tuple(int.from_bytes(framed[i:i + w], "big") for i in range(0, len(framed), w))


def elements_to_bytes(elements, field: PrimeField) -> bytes:
    w = field.chunk_bytes
    raw = b"".join(int(e).to_bytes(w, "big") for e in elements)
    if len(raw) < 4:
        raise ValueError("truncated element stream")
    length = int.from_bytes(raw[:4], "big")
    if length > len(raw) - 4:
        raise ValueError("inconsistent length prefix")
    return raw[4:4 + length]


def share_secret_bytes(data: bytes, threshold: int, rho: int, field: PrimeField,
                       rng: random.Random) -> list[Share]:
    """Share a byte-string secret blockwise: one polynomial per chunk, one
    composite share per index."""
    chunks = bytes_to_elements(data, field)
    polys = [make_polynomial(c, threshold, field, rng) for c in chunks]
    if rho < threshold:
        raise InsufficientSharesError("rho below threshold makes reconstruction impossible")
    if rho >= field.q:
        raise ValueError("rho must stay below the field modulus")
    return [
        Share(index=i, value=tuple(p.evaluate(field, i) for p in polys))
        for i in range(1, rho + 1)
    ]


def reconstruct_secret_bytes(shares, threshold: int, field: PrimeField) -> bytes:
    return elements_to_bytes(reconstruct(shares, threshold, field), field)


def encode_share(share: Share, field: PrimeField) -> bytes:
    """Wire layout: index (4B BE) || chunk values (element_bytes each, BE)
    || signature length (2B BE) || signature."""
    if not 0 <= share.index < 2**32:
        raise ValueError("index out of range")
    if len(share.signature) >= 2**16:
        raise ValueError("signature too long")
    body = share.index.to_bytes(4, "big")
    for v in share.value:
        body += int(v).to_bytes(field.element_bytes, "big")
    body += len(share.signature).to_bytes(2, "big") + share.signature
    return body


def signed_portion(share: Share, field: PrimeField) -> bytes:
    """Bytes a share signature covers: index plus chunk values."""
    body = share.index.to_bytes(4, "big")
    for v in share.value:
        body += int(v).to_bytes(field.element_bytes, "big")
    return body


def decode_share(data: bytes, field: PrimeField, chunks: int = 1) -> Share:
    w = field.element_bytes
    fixed = 4 + chunks * w + 2
    if len(data) < fixed:
        raise ValueError("share too short")
    index = int.from_bytes(data[:4], "big")
    values = tuple(
        int.from_bytes(data[4 + c * w:4 + (c + 1) * w], "big") for c in range(chunks)
    )
    if any(v >= field.q for v in values):
        raise ValueError("share value outside the field")
    sig_len = int.from_bytes(data[fixed - 2:fixed], "big")
    if len(data) != fixed + sig_len:
        raise ValueError("share length mismatch")
    return Share(index=index, value=values, signature=data[fixed:])
