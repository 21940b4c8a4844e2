"""Threshold sharing over a prime field.

The small-field cases are worked by hand: q = 251, P(x) = 5 + 3x gives
P(1) = 8 and P(2) = 11, and the Lagrange multipliers for {1, 2} and
{1, 2, 3} are (2, 250) and (3, 248, 1)."""

import random
from itertools import combinations

import pytest

from kpsec.sharing import (
    DEFAULT_PRIME,
    InsufficientSharesError,
    PrimeField,
    Share,
    SharePolynomial,
    bytes_to_elements,
    decode_share,
    elements_to_bytes,
    encode_share,
    eval_shares,
    lagrange_coefficients,
    make_polynomial,
    reconstruct,
    reconstruct_secret_bytes,
    share_secret_bytes,
    signed_portion,
)

F251 = PrimeField(251)
BIG = PrimeField(DEFAULT_PRIME)


def test_default_prime_is_prime_and_sized():
    assert DEFAULT_PRIME == 2**256 - 189
    assert BIG.element_bytes == 32
    assert BIG.chunk_bytes == 31


def test_field_rejects_composites():
    with pytest.raises(ValueError):
        PrimeField(250)
    with pytest.raises(ValueError):
        PrimeField(2**16 + 5)  # 65541 = 3 * 21847
    PrimeField(65537)


def test_field_ops_hand_values():
    assert F251.add(200, 100) == 49
    assert F251.sub(3, 10) == 244
    assert F251.mul(16, 16) == 5
    assert F251.mul(7, F251.inv(7)) == 1


def test_polynomial_hand_evaluation():
    poly = SharePolynomial(coefficients=(5, 3))
    assert poly.threshold == 2
    assert poly.evaluate(F251, 1) == 8
    assert poly.evaluate(F251, 2) == 11
    assert poly.evaluate(F251, 0) == 5


def test_eval_shares_indices_start_at_one():
    poly = SharePolynomial(coefficients=(5, 3))
    shares = eval_shares(poly, rho=4, field=F251)
    assert [s.index for s in shares] == [1, 2, 3, 4]
    assert shares[0].value == (8,)
    assert shares[1].value == (11,)


def test_eval_shares_rho_below_threshold_rejected():
    poly = SharePolynomial(coefficients=(5, 3, 7))
    with pytest.raises(InsufficientSharesError):
        eval_shares(poly, rho=2, field=F251)


def test_lagrange_hand_values():
    assert lagrange_coefficients([1, 2], F251) == [2, 250]
    assert lagrange_coefficients([1, 2, 3], F251) == [3, 248, 1]


def test_lagrange_rejects_bad_indices():
    with pytest.raises(ValueError):
        lagrange_coefficients([1, 1], F251)
    with pytest.raises(ValueError):
        lagrange_coefficients([0, 2], F251)


def test_lagrange_power_sums():
    # sum l_i * i^m over the index set recovers delta_{m,0} for m < theta,
    # the defining property of interpolation at zero
    rng = random.Random(4)
    for _ in range(20):
        theta = rng.randrange(2, 8)
        indices = rng.sample(range(1, 40), theta)
        coeffs = lagrange_coefficients(indices, F251)
        for m in range(theta):
            total = 0
            for i, l in zip(indices, coeffs):
                total = F251.add(total, F251.mul(l, pow(i, m, 251)))
            assert total == (1 if m == 0 else 0)


def test_reconstruct_hand_case():
    poly = SharePolynomial(coefficients=(5, 3))
    shares = eval_shares(poly, rho=3, field=F251)
    assert reconstruct(shares[:2], threshold=2, field=F251) == (5,)
    assert reconstruct(shares, threshold=2, field=F251) == (5,)  # lowest two


def test_reconstruct_any_subset_round_trip():
    rng = random.Random(9)
    for _ in range(30):
        theta = rng.randrange(1, 6)
        rho = rng.randrange(theta, 9)
        secret = rng.randrange(0, 251)
        poly = make_polynomial(secret, theta, F251, rng)
        shares = eval_shares(poly, rho, F251)
        subset = rng.sample(shares, theta)
        assert reconstruct(subset, theta, F251) == (secret,)


def test_reconstruct_insufficient_and_duplicates():
    poly = SharePolynomial(coefficients=(5, 3, 9))
    shares = eval_shares(poly, rho=5, field=F251)
    with pytest.raises(InsufficientSharesError):
        reconstruct(shares[:2], threshold=3, field=F251)
    with pytest.raises(InsufficientSharesError):
        reconstruct([shares[0], shares[0], shares[1]], threshold=3,
                    field=F251)
    # a duplicate alongside enough distinct indices is harmless
    got = reconstruct([shares[0], shares[0], shares[1], shares[2]],
                      threshold=3, field=F251)
    assert got == (5,)


def test_reconstruct_rejects_mixed_chunk_counts():
    a = Share(index=1, value=(1, 2))
    b = Share(index=2, value=(3,))
    with pytest.raises(ValueError):
        reconstruct([a, b], threshold=2, field=F251)


def test_theta_minus_one_shares_hide_the_secret():
    # with two shares of a threshold-3 polynomial, sweeping the value of a
    # hypothetical third share makes the reconstructed secret take every
    # field value exactly once: the partial set is consistent with anything
    rng = random.Random(17)
    poly = make_polynomial(123, 3, F251, rng)
    s1, s2 = eval_shares(poly, 3, F251)[:2]
    seen = set()
    for w in range(251):
        fake = Share(index=3, value=(w,))
        (secret,) = reconstruct([s1, s2, fake], threshold=3, field=F251)
        seen.add(secret)
    assert seen == set(range(251))


def test_bytes_round_trip_various_lengths():
    rng = random.Random(3)
    for size in (1, 4, 26, 27, 28, 31, 32, 64, 200):
        data = bytes(rng.getrandbits(8) for _ in range(size))
        elements = bytes_to_elements(data, BIG)
        assert all(0 <= e < BIG.q for e in elements)
        assert elements_to_bytes(elements, BIG) == data


def test_bytes_chunk_count():
    # 4-byte length prefix plus payload, 31 bytes per chunk
    assert len(bytes_to_elements(b"x" * 20, BIG)) == 1
    assert len(bytes_to_elements(b"x" * 27, BIG)) == 1
    assert len(bytes_to_elements(b"x" * 28, BIG)) == 2
    assert len(bytes_to_elements(b"x" * 58, BIG)) == 2
    assert len(bytes_to_elements(b"x" * 59, BIG)) == 3


def test_bytes_rejects_tiny_field():
    with pytest.raises(ValueError):
        bytes_to_elements(b"hi", F251)


def test_share_secret_bytes_round_trip():
    rng = random.Random(6)
    for _ in range(15):
        theta = rng.randrange(1, 6)
        rho = rng.randrange(theta, 10)
        secret = bytes(rng.getrandbits(8) for _ in range(rng.randrange(1, 90)))
        shares = share_secret_bytes(secret, theta, rho, BIG, rng)
        assert len(shares) == rho
        chunk_counts = {len(s.value) for s in shares}
        assert len(chunk_counts) == 1
        subset = rng.sample(shares, theta)
        assert reconstruct_secret_bytes(subset, theta, BIG) == secret


def test_wire_codec_exact_layout():
    share = Share(index=3, value=(0x0102, 7), signature=b"\xaa\xbb")
    wire = encode_share(share, BIG)
    assert wire[:4] == (3).to_bytes(4, "big")
    assert wire[4:36] == (0x0102).to_bytes(32, "big")
    assert wire[36:68] == (7).to_bytes(32, "big")
    assert wire[68:70] == (2).to_bytes(2, "big")
    assert wire[70:] == b"\xaa\xbb"
    assert signed_portion(share, BIG) == wire[:68]
    back = decode_share(wire, BIG, chunks=2)
    assert back == share


def test_wire_codec_round_trip_random():
    rng = random.Random(12)
    for _ in range(40):
        chunks = rng.randrange(1, 4)
        share = Share(
            index=rng.randrange(1, 1000),
            value=tuple(rng.randrange(BIG.q) for _ in range(chunks)),
            signature=bytes(rng.getrandbits(8)
                            for _ in range(rng.randrange(0, 90))),
        )
        assert decode_share(encode_share(share, BIG), BIG, chunks) == share


def test_wire_codec_rejects_malformed():
    share = Share(index=1, value=(5,), signature=b"sig")
    wire = encode_share(share, BIG)
    with pytest.raises(ValueError):
        decode_share(wire[:-1], BIG, chunks=1)
    with pytest.raises(ValueError):
        decode_share(wire + b"\x00", BIG, chunks=1)
    with pytest.raises(ValueError):
        decode_share(wire, BIG, chunks=2)
    # element out of field range
    bad = (1).to_bytes(4, "big") + (BIG.q).to_bytes(32, "big") \
        + (0).to_bytes(2, "big")
    with pytest.raises(ValueError):
        decode_share(bad, BIG, chunks=1)


def test_reconstruction_cost_scales_quadratically():
    # doubling theta should roughly quadruple multiplications; the counter
    # band is wide because constant work shifts the ratio at small sizes
    rng = random.Random(8)
    field = PrimeField(DEFAULT_PRIME)
    costs = {}
    for theta in (10, 20):
        poly = make_polynomial(42, theta, field, rng)
        shares = eval_shares(poly, theta, field)
        before = field.mul_ops
        reconstruct(shares, theta, field)
        costs[theta] = field.mul_ops - before
    ratio = costs[20] / costs[10]
    assert 3.0 < ratio < 5.5


def test_big_field_full_round_trip_with_every_subset():
    rng = random.Random(21)
    secret = bytes(rng.getrandbits(8) for _ in range(40))
    shares = share_secret_bytes(secret, 3, 6, BIG, rng)
    for subset in combinations(shares, 3):
        assert reconstruct_secret_bytes(list(subset), 3, BIG) == secret
    for subset in combinations(shares, 2):
        with pytest.raises(InsufficientSharesError):
            reconstruct(list(subset), 3, BIG)
