"""Three-phase key exchange over a keyring overlay.

Phase 1 splits the source's public key into signed shares and pushes one
share down each of rho vertex-disjoint overlay paths, hop-encrypted for
every relay.  Phase 2 has the destination reconstruct a candidate key from
theta shares, check the share signatures against it, and answer with its
own public key encrypted under the candidate, routed over the shortest
physical path.  Phase 3 derives the pairwise key on both ends and moves the
payload symmetrically, again over the shortest physical path, with no
relay decryption anywhere.

The simulator runs a single session as a discrete-round event loop: one
physical hop per round, per-hop byte accounting, deterministic under a
session seed.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from itertools import combinations

from .adversary import OBSERVE, SUBSTITUTE_SHARES, AdversarySpec, compromise
from .crypto import (
    SECP256K1,
    AuthenticationError,
    KeyPair,
    asym_decrypt,
    asym_encrypt,
    derive_pairwise,
    keygen,
    sign,
    sym_decrypt,
    sym_encrypt,
    verify,
)
from .netmodel import (
    Keyring,
    OverlayGraph,
    PhysicalTopology,
    assign_keyrings,
    build_overlay,
    generate_topology,
    load_network,
    save_network,
)
from .paths import Path, max_vertex_disjoint_paths, shortest_physical_path
from .sharing import (
    DEFAULT_PRIME,
    PrimeField,
    Share,
    decode_share,
    encode_share,
    reconstruct,
    elements_to_bytes,
    share_secret_bytes,
    signed_portion,
)
from .streams import stream

DEFAULT_FIELD = PrimeField(DEFAULT_PRIME)

SHARE = "share"
REPLY = "pubkey-reply"
DATA = "data"


class ProtocolError(Exception):
    """A session could not be set up or completed."""


class InsufficientDisjointPathsError(ProtocolError):
    """The overlay offers fewer vertex-disjoint paths than requested."""


class PhysicalUnreachableError(ProtocolError):
    """Some required physical route does not exist."""


@dataclass(frozen=True)
class SessionConfig:
    source: int
    destination: int
    rho: int
    theta: int
    payload: bytes = b"\x00" * 64

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("source and destination must differ")
        if not 1 <= self.theta <= self.rho:
            raise ValueError("need 1 <= theta <= rho")
        if not self.payload:
            raise ValueError("payload must be non-empty")


class Network:
    """Physical topology, keyrings, overlay, and per-node keypairs.

    Keypairs are regenerated from the stored seed, so a saved network file
    reloads to the identical cryptographic state.
    """

    def __init__(self, topo: PhysicalTopology, keyrings, seed: int,
                 group=SECP256K1):
        if len(keyrings) != topo.n:
            raise ValueError("one keyring per node required")
        self.topo = topo
        self.keyrings = tuple(keyrings)
        self.seed = seed
        self.group = group
        self.overlay = build_overlay(self.keyrings)
        self.keypairs = tuple(
            keygen(group, stream(seed, "node-key", i)) for i in range(topo.n)
        )
        self._diameter: int | None = None

    @property
    def n(self) -> int:
        return self.topo.n

    @property
    def k(self) -> int:
        return len(self.keyrings[0].known)

    @classmethod
    def generate(cls, n: int, k: int, side: float, radio_range: float,
                 seed: int, group=SECP256K1) -> "Network":
        topo = generate_topology(n, side, radio_range, seed)
        keyrings = assign_keyrings(n, k, seed)
        return cls(topo, keyrings, seed, group)

    @classmethod
    def load(cls, path, group=SECP256K1) -> "Network":
        topo, keyrings, seed = load_network(path)
        return cls(topo, keyrings, seed, group)

    def save(self, path) -> None:
        save_network(path, self.topo, self.keyrings, self.seed)

    def public_key(self, node: int):
        return self.keypairs[node].y

    def diameter(self) -> int:
        """Longest shortest-path hop count in the physical graph,
        over connected pairs.  Cached after the first call."""
        if self._diameter is None:
            best = 0
            for start in range(self.n):
                dist = {start: 0}
                frontier = [start]
                while frontier:
                    nxt = []
                    for u in frontier:
                        for v in self.topo.neighbors[u]:
                            if v not in dist:
                                dist[v] = dist[u] + 1
                                nxt.append(v)
                    frontier = nxt
                best = max(best, max(dist.values()))
            self._diameter = best
        return self._diameter


@dataclass(frozen=True)
class PathPlan:
    overlay_paths: tuple[Path, ...]
    segments: tuple[tuple[Path, ...], ...]  # per path, one per overlay hop
    reply_path: Path
    data_path: Path


def plan_paths(net: Network, session: SessionConfig) -> PathPlan:
    s, d = session.source, session.destination
    if not (0 <= s < net.n and 0 <= d < net.n):
        raise ValueError("session endpoints outside the network")
    if session.rho > net.k:
        raise ValueError("rho cannot exceed the keyring size")

    # Run the flow to maximum and keep the first rho decomposed paths;
    # capping augmentation early would skew the plan toward short paths.
    found = max_vertex_disjoint_paths(net.overlay, s, d)
    if len(found) < session.rho:
        raise InsufficientDisjointPathsError(
            f"{len(found)} disjoint overlay paths from {s} to {d}, "
            f"need {session.rho}"
        )
    overlay_paths = tuple(found[: session.rho])

    segments = []
    for path in overlay_paths:
        legs = []
        for u, v in zip(path.nodes, path.nodes[1:]):
            leg = shortest_physical_path(net.topo, u, v)
            if leg is None:
                raise PhysicalUnreachableError(
                    f"no physical route for overlay hop {u}->{v}"
                )
            legs.append(leg)
        segments.append(tuple(legs))

    reply = shortest_physical_path(net.topo, d, s)
    data = shortest_physical_path(net.topo, s, d)
    if reply is None or data is None:
        raise PhysicalUnreachableError(
            f"{s} and {d} are not physically connected"
        )
    return PathPlan(overlay_paths=overlay_paths, segments=tuple(segments),
                    reply_path=reply, data_path=data)


@dataclass(frozen=True)
class Message:
    kind: str
    path_index: int          # which disjoint path, -1 for reply/data
    hop_route: tuple[int, ...]   # physical nodes still ahead, current first
    overlay_remaining: tuple[int, ...]  # overlay waypoints after this segment
    segment_index: int
    payload: bytes

    @property
    def size(self) -> int:
        return len(self.payload)


@dataclass
class SessionReport:
    success: bool
    failure_reason: str | None
    de_steps_per_path: tuple[int, ...]
    data_path_de_steps: int
    key_exchange_bytes: int
    data_bytes: int
    key_exchange_overlay_hops: int
    reply_physical_hops: int
    data_path_physical_hops: int
    phase_rounds: tuple[int, int, int]
    attack_detected: bool
    forged_key_accepted: bool
    forged_key_reconstructible: bool
    transcript: tuple = ()

    @property
    def de_total(self) -> int:
        return sum(self.de_steps_per_path)


def share_chunk_count(group, field: PrimeField = DEFAULT_FIELD) -> int:
    """Field elements per share for this group's encoded key size."""
    prefixed = 4 + group.element_width
    return -(-prefixed // field.chunk_bytes)


def find_consistent_subset(shares, theta: int, field: PrimeField, group):
    """First theta-subset (lex order by index) whose reconstruction decodes
    to a group element that verifies every signature in the subset.
    Returns (element, subset_indices) or None."""
    for subset, candidate in iter_consistent_subsets(shares, theta, field,
                                                     group):
        return candidate, subset
    return None


def iter_consistent_subsets(shares, theta: int, field: PrimeField, group):
    by_index: dict[int, Share] = {}
    for share in shares:
        by_index.setdefault(share.index, share)
    if len(by_index) < theta:
        return
    for subset in combinations(sorted(by_index), theta):
        chosen = [by_index[i] for i in subset]
        candidate = _try_reconstruct(chosen, theta, field, group)
        if candidate is None:
            continue
        if all(
            verify(group, candidate, signed_portion(sh, field), sh.signature)
            for sh in chosen
        ):
            yield subset, candidate


def _try_reconstruct(chosen, theta, field, group):
    try:
        elements = reconstruct(chosen, theta, field)
        raw = elements_to_bytes(elements, field)
        return group.decode(raw)
    except (ValueError, OverflowError):
        return None


def build_share_messages(net: Network, session: SessionConfig,
                         plan: PathPlan, seed: int) -> list[Message]:
    """Phase-1 sendout: split the source key, sign each share with the
    source's private key, and hop-encrypt for each path's first relay
    (or the destination on a direct overlay edge)."""
    s = session.source
    key = net.keypairs[s]
    raw = net.group.encode(key.y)
    shares = share_secret_bytes(
        raw, session.theta, session.rho, DEFAULT_FIELD,
        rng=stream(seed, "share-poly"),
    )
    messages = []
    for i, (path, legs) in enumerate(zip(plan.overlay_paths, plan.segments)):
        share = shares[i]
        body = signed_portion(share, DEFAULT_FIELD)
        signed = replace(share, signature=sign(net.group, key.x, body))
        wire = encode_share(signed, DEFAULT_FIELD)
        first_hop = path.nodes[1]
        blob = asym_encrypt(
            net.group, net.public_key(first_hop), wire,
            rng=stream(seed, "phase1-enc", i),
        )
        messages.append(Message(
            kind=SHARE,
            path_index=i,
            hop_route=legs[0].nodes,
            overlay_remaining=path.nodes[2:],
            segment_index=0,
            payload=blob,
        ))
    return messages


class _ForgedMaterial:
    """Substitute-capable adversary state: a fake source keypair plus a
    pre-split, pre-signed share of it for every path index."""

    def __init__(self, group, theta: int, rho: int, seed: int):
        self.keypair = keygen(group, stream(seed, "forged-key"))
        raw = group.encode(self.keypair.y)
        shares = share_secret_bytes(
            raw, theta, rho, DEFAULT_FIELD, rng=stream(seed, "forged-poly")
        )
        self.wire_by_index = {}
        for share in shares:
            body = signed_portion(share, DEFAULT_FIELD)
            signed = replace(
                share, signature=sign(group, self.keypair.x, body)
            )
            self.wire_by_index[share.index] = encode_share(
                signed, DEFAULT_FIELD
            )


class _SessionRunner:
    def __init__(self, net: Network, session: SessionConfig,
                 adversary: AdversarySpec | None, seed: int,
                 collect_transcript: bool, timeout_factor: int):
        self.net = net
        self.session = session
        self.seed = seed
        self.collect_transcript = collect_transcript
        self.field = DEFAULT_FIELD
        self.chunks = share_chunk_count(net.group, self.field)

        self.plan = plan_paths(net, session)
        self.compromised = frozenset(
            compromise(net.n, adversary,
                       exclude=(session.source, session.destination))
        ) if adversary else frozenset()
        self.capabilities = (adversary.capabilities if adversary
                             else frozenset())
        self.forged = None
        if adversary and SUBSTITUTE_SHARES in adversary.capabilities:
            self.forged = _ForgedMaterial(
                net.group, session.theta, session.rho, adversary.seed
            )

        self.heap: list[tuple[int, int, Message]] = []
        self.seq = 0
        self.round = 0
        self.bytes_by_kind = {SHARE: 0, REPLY: 0, DATA: 0}
        self.de_steps = [0] * session.rho
        self.received: dict[int, Share] = {}
        self.tried: set[tuple[int, ...]] = set()
        self.accepted = None          # group element or None
        self.accept_round: int | None = None
        self.first_share_round: int | None = None
        self.reply_round: int | None = None
        self.done_round: int | None = None
        self.success = False
        self.failure_reason: str | None = None
        self.transcript: list[tuple[int, int, str, bytes]] = []
        self.deadline: int | None = None
        self.timeout_factor = timeout_factor
        self.finished = False

    # -- transport ---------------------------------------------------------

    def dispatch(self, msg: Message, at_round: int) -> None:
        if len(msg.hop_route) < 2:
            raise ProtocolError("message route must have at least one hop")
        heapq.heappush(self.heap, (at_round + 1, self.seq, msg))
        self.seq += 1

    def run(self) -> SessionReport:
        for msg in build_share_messages(self.net, self.session, self.plan,
                                        self.seed):
            self.dispatch(msg, at_round=0)
        hard_stop = max(4 * (self.net.diameter() + 1) * (
            max(p.hops() for p in self.plan.overlay_paths) + 2), 64)
        # The outcome freezes once `finished` is set, but in-flight share
        # traffic keeps propagating: `received` and the byte ledger must
        # reflect every delivery, not the race against the reply leg.
        while self.heap:
            arrival, _, msg = heapq.heappop(self.heap)
            if arrival > hard_stop:
                break
            self.round = arrival
            self.on_hop(msg)
        return self.report()

    def on_hop(self, msg: Message) -> None:
        node = msg.hop_route[1]
        self.bytes_by_kind[msg.kind] += msg.size
        if node in self.compromised and OBSERVE in self.capabilities:
            self.observe(node, msg.kind, msg.payload)
        if len(msg.hop_route) > 2:
            self.dispatch(replace(msg, hop_route=msg.hop_route[1:]),
                          self.round)
        else:
            self.at_waypoint(node, msg)

    def observe(self, node: int, kind: str, data: bytes) -> None:
        if self.collect_transcript:
            self.transcript.append((self.round, node, kind, data))

    # -- waypoint handlers --------------------------------------------------

    def at_waypoint(self, node: int, msg: Message) -> None:
        if msg.kind == SHARE:
            if node == self.session.destination:
                self.share_at_destination(msg)
            else:
                self.share_at_relay(node, msg)
        elif msg.kind == REPLY:
            self.reply_at_source(msg)
        elif msg.kind == DATA:
            self.data_at_destination(msg)

    def share_at_relay(self, node: int, msg: Message) -> None:
        self.de_steps[msg.path_index] += 1
        try:
            wire = asym_decrypt(
                self.net.group, self.net.keypairs[node].x, msg.payload
            )
        except AuthenticationError:
            return  # corrupt blob dies here
        if node in self.compromised and OBSERVE in self.capabilities:
            self.observe(node, "relay-plaintext", wire)
        if self.forged is not None and node in self.compromised:
            wire = self.forged.wire_by_index[msg.path_index + 1]
        nxt = msg.overlay_remaining[0]
        blob = asym_encrypt(
            self.net.group, self.net.public_key(nxt), wire,
            rng=stream(self.seed, "relay-enc", self.seq),
        )
        legs = self.plan.segments[msg.path_index]
        self.dispatch(Message(
            kind=SHARE,
            path_index=msg.path_index,
            hop_route=legs[msg.segment_index + 1].nodes,
            overlay_remaining=msg.overlay_remaining[1:],
            segment_index=msg.segment_index + 1,
            payload=blob,
        ), self.round)

    def share_at_destination(self, msg: Message) -> None:
        d = self.session.destination
        try:
            wire = asym_decrypt(
                self.net.group, self.net.keypairs[d].x, msg.payload
            )
            share = decode_share(wire, self.field, chunks=self.chunks)
        except (AuthenticationError, ValueError):
            return
        if not 1 <= share.index <= self.session.rho:
            return
        if self.first_share_round is None:
            self.first_share_round = self.round
            self.deadline = self.round + self.timeout_factor * (
                self.net.diameter() + 1)
        self.received.setdefault(share.index, share)
        if self.accepted is None and self.round <= (self.deadline or 0):
            self.try_reconstruction()

    def try_reconstruction(self) -> None:
        theta = self.session.theta
        if len(self.received) < theta:
            return
        for subset in combinations(sorted(self.received), theta):
            if subset in self.tried:
                continue
            self.tried.add(subset)
            chosen = [self.received[i] for i in subset]
            candidate = _try_reconstruct(chosen, theta, self.field,
                                         self.net.group)
            if candidate is None:
                continue
            if not all(
                verify(self.net.group, candidate,
                       signed_portion(sh, self.field), sh.signature)
                for sh in chosen
            ):
                continue
            self.accepted = candidate
            self.accept_round = self.round
            self.send_reply()
            return

    def send_reply(self) -> None:
        d = self.session.destination
        raw = self.net.group.encode(self.net.public_key(d))
        blob = asym_encrypt(
            self.net.group, self.accepted, raw,
            rng=stream(self.seed, "reply-enc"),
        )
        self.dispatch(Message(
            kind=REPLY, path_index=-1, hop_route=self.plan.reply_path.nodes,
            overlay_remaining=(), segment_index=0, payload=blob,
        ), self.round)

    def reply_at_source(self, msg: Message) -> None:
        self.reply_round = self.round
        s = self.session.source
        try:
            raw = asym_decrypt(
                self.net.group, self.net.keypairs[s].x, msg.payload
            )
            peer = self.net.group.decode(raw)
        except (AuthenticationError, ValueError):
            # The destination answered a key that is not ours; the reply is
            # unreadable and the handshake dies before phase 3.
            self.fail("reply-decrypt-failed")
            return
        pairwise = derive_pairwise(self.net.group, self.net.keypairs[s].x, peer)
        blob = sym_encrypt(pairwise, self.session.payload, nonce=1)
        self.dispatch(Message(
            kind=DATA, path_index=-1, hop_route=self.plan.data_path.nodes,
            overlay_remaining=(), segment_index=0, payload=blob,
        ), self.round)

    def data_at_destination(self, msg: Message) -> None:
        d = self.session.destination
        pairwise = derive_pairwise(self.net.group, self.net.keypairs[d].x,
                                   self.accepted)
        try:
            plain = sym_decrypt(pairwise, msg.payload, nonce=1)
        except AuthenticationError:
            self.fail("data-decrypt-failed")
            return
        if plain != self.session.payload:
            self.fail("payload-mismatch")
            return
        self.success = True
        self.done_round = self.round
        self.finished = True

    def fail(self, reason: str) -> None:
        self.failure_reason = reason
        self.finished = True

    # -- reporting ----------------------------------------------------------

    def report(self) -> SessionReport:
        if not self.success and self.failure_reason is None:
            if self.accepted is not None:
                self.failure_reason = "timeout"
            elif len(self.received) >= self.session.theta:
                self.failure_reason = "attack-detected"
            else:
                self.failure_reason = "insufficient-shares"

        attack_detected = (self.accepted is None
                           and len(self.received) >= self.session.theta)
        forged_accepted = False
        forged_reconstructible = False
        if self.forged is not None:
            target = self.net.group.encode(self.forged.keypair.y)
            if self.accepted is not None:
                forged_accepted = (
                    self.net.group.encode(self.accepted) == target
                )
            for _, candidate in iter_consistent_subsets(
                self.received.values(), self.session.theta, self.field,
                self.net.group,
            ):
                if self.net.group.encode(candidate) == target:
                    forged_reconstructible = True
                    break

        p1 = self.accept_round or 0
        p2 = (self.reply_round - self.accept_round
              if self.reply_round is not None and self.accept_round is not None
              else 0)
        p3 = (self.done_round - self.reply_round
              if self.done_round is not None and self.reply_round is not None
              else 0)
        return SessionReport(
            success=self.success,
            failure_reason=None if self.success else self.failure_reason,
            de_steps_per_path=tuple(self.de_steps),
            data_path_de_steps=0,
            key_exchange_bytes=(self.bytes_by_kind[SHARE]
                                + self.bytes_by_kind[REPLY]),
            data_bytes=self.bytes_by_kind[DATA],
            key_exchange_overlay_hops=sum(
                p.hops() for p in self.plan.overlay_paths),
            reply_physical_hops=self.plan.reply_path.hops(),
            data_path_physical_hops=self.plan.data_path.hops(),
            phase_rounds=(p1, p2, p3),
            attack_detected=attack_detected,
            forged_key_accepted=forged_accepted,
            forged_key_reconstructible=forged_reconstructible,
            transcript=tuple(self.transcript),
        )


def run_session(net: Network, session: SessionConfig,
                adversary: AdversarySpec | None = None, seed: int = 0,
                collect_transcript: bool = False,
                timeout_factor: int = 4) -> SessionReport:
    """Simulate one end-to-end key exchange plus first data message.

    Deterministic for fixed (net, session, adversary, seed).  Raises
    InsufficientDisjointPathsError / PhysicalUnreachableError when the
    topology cannot support the session; adversarial interference never
    raises, it lands in the report.
    """
    runner = _SessionRunner(net, session, adversary, seed,
                            collect_transcript, timeout_factor)
    return runner.run()
