"""Pairwise secret establishment and mutual commitment endorsement.

Each unordered pair of participants shares, per scheduled round, a key
and a blinding value; the reverse direction holds the negations so all
pads cancel in a round sum.  Every directed per-round commitment is
endorsed by the counterparty's signature, which is what later lets an
investigation pin blame.  A participant may refuse to share a secret
with a peer; the edge is then publicly marked opted out and contributes
zero pads and identity commitments.

Secrets travel over ideal channels here: the builder simply hands both
endpoints the same values.  Key agreement protocols are out of scope.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from . import merkle
from .errors import PathInvalid, RoundBudgetExhausted, SignatureRefused
from .groups import GroupParams, commit


# ---------------------------------------------------------------------------
# Schnorr signatures over the same group (one keypair per participant)


@dataclass(frozen=True)
class SigningKey:
    secret: int
    public: int


def gen_signing_key(params: GroupParams, rng) -> SigningKey:
    x = rng.randrange(1, params.q)
    return SigningKey(secret=x, public=pow(params.g, x, params.p))


def _sig_challenge(params, public, nonce_point, message) -> int:
    h = hashlib.sha256()
    h.update(b"dcmesh/sig/v1")
    h.update(params.domain_tag)
    h.update(params.element_to_bytes(public))
    h.update(params.element_to_bytes(nonce_point))
    h.update(len(message).to_bytes(4, "big"))
    h.update(message)
    return int.from_bytes(h.digest(), "big") % params.q


def sign(params: GroupParams, key: SigningKey, message: bytes) -> tuple[int, int]:
    # deterministic nonce keeps the whole setup reproducible from a seed
    nonce_material = hashlib.sha256(
        b"dcmesh/nonce" + params.scalar_to_bytes(key.secret) + message
    ).digest()
    k = int.from_bytes(nonce_material, "big") % params.q
    nonce_point = pow(params.g, k, params.p)
    e = _sig_challenge(params, key.public, nonce_point, message)
    s = (k + e * key.secret) % params.q
    return (e, s)


def verify_sig(params: GroupParams, public: int, message: bytes, signature) -> bool:
    try:
        e, s = signature
    except (TypeError, ValueError):
        return False
    if not (0 <= e < params.q and 0 <= s < params.q):
        return False
    nonce_point = pow(params.g, s, params.p) * pow(public, (params.q - e) % params.q, params.p) % params.p
    return _sig_challenge(params, public, nonce_point, message) == e


# ---------------------------------------------------------------------------
# pairwise secrets


@dataclass(frozen=True)
class RoundSecret:
    key: int
    blind: int


@dataclass(frozen=True)
class PairwiseSecret:
    """Per-round secrets for the directed edge i -> j."""

    i: int
    j: int
    rounds: tuple[RoundSecret, ...]

    def reversed(self, q: int) -> "PairwiseSecret":
        return PairwiseSecret(
            i=self.j,
            j=self.i,
            rounds=tuple(
                RoundSecret((-s.key) % q, (-s.blind) % q) for s in self.rounds
            ),
        )


@dataclass(frozen=True)
class SignedCommitment:
    """A per-round commitment for edge holder -> peer, endorsed by the peer."""

    holder: int
    peer: int
    slot: int
    commitment: int
    signature: tuple[int, int]


def commitment_payload(params: GroupParams, c: int, holder: int, peer: int, slot: int) -> bytes:
    return (
        b"dcmesh/pair/v1"
        + params.element_to_bytes(c)
        + holder.to_bytes(4, "big")
        + peer.to_bytes(4, "big")
        + slot.to_bytes(4, "big")
    )


def establish_pair(
    params: GroupParams,
    i: int,
    j: int,
    rng,
    rounds: int,
    key_i: SigningKey,
    key_j: SigningKey,
    refusers=frozenset(),
):
    """Agree on fresh per-round secrets for the pair (i, j).

    Returns the direction i -> j secrets along with both directions'
    endorsed commitments.  Raises SignatureRefused when either endpoint
    declines; the caller records the edge as opted out.
    """
    if i == j:
        raise ValueError("a participant does not pair with itself")
    if i in refusers:
        raise SignatureRefused(i)
    if j in refusers:
        raise SignatureRefused(j)
    secrets = PairwiseSecret(
        i=i,
        j=j,
        rounds=tuple(
            RoundSecret(rng.randrange(params.q), rng.randrange(params.q)) for _ in range(rounds)
        ),
    )
    signed_for_i = []
    signed_for_j = []
    for slot, s in enumerate(secrets.rounds):
        c_ij = commit(params, s.key, s.blind)
        c_ji = pow(c_ij, -1, params.p)  # commit(-K, -r)
        signed_for_i.append(
            SignedCommitment(i, j, slot, c_ij, sign(params, key_j, commitment_payload(params, c_ij, i, j, slot)))
        )
        signed_for_j.append(
            SignedCommitment(j, i, slot, c_ji, sign(params, key_i, commitment_payload(params, c_ji, j, i, slot)))
        )
    return secrets, tuple(signed_for_i), tuple(signed_for_j)


# ---------------------------------------------------------------------------
# the key graph and per-participant views


@dataclass(frozen=True)
class EdgeState:
    lo: int
    hi: int
    established: bool
    secret: PairwiseSecret | None = None          # direction lo -> hi
    signed_lo: tuple[SignedCommitment, ...] = ()  # held by lo, endorsed by hi
    signed_hi: tuple[SignedCommitment, ...] = ()  # held by hi, endorsed by lo


@dataclass(frozen=True)
class EdgePublic:
    lo: int
    hi: int
    established: bool
    root_lo: bytes = b""
    root_hi: bytes = b""


@dataclass(frozen=True)
class KeyGraphPublic:
    """What everyone may see: identities, opt-outs, and batch roots."""

    n: int
    budget: int
    participants: tuple[int, ...]
    publics: dict
    edges: tuple[EdgePublic, ...]

    def optout_pairs(self) -> set:
        return {(e.lo, e.hi) for e in self.edges if not e.established}


class KeyGraph:
    """Complete graph of pairwise edges over the active participants."""

    def __init__(self, params, participants, budget, signing, edges):
        self.params = params
        self.participants = tuple(participants)
        self.budget = budget
        self.signing = signing  # pid -> SigningKey
        self.edges = edges      # (lo, hi) -> EdgeState

    def edge(self, a: int, b: int) -> EdgeState:
        return self.edges[(min(a, b), max(a, b))]

    def round_secret(self, i: int, j: int, slot: int) -> RoundSecret:
        """Directed per-round secret for edge i -> j (zero when opted out)."""
        state = self.edge(i, j)
        if not state.established:
            return RoundSecret(0, 0)
        s = state.secret.rounds[slot]
        if i == state.lo:
            return s
        q = self.params.q
        return RoundSecret((-s.key) % q, (-s.blind) % q)

    def public(self) -> KeyGraphPublic:
        edges = []
        for (lo, hi), state in sorted(self.edges.items()):
            if not state.established:
                edges.append(EdgePublic(lo, hi, False))
                continue
            root_lo, _ = merkle.build_tree(
                [self.params.element_to_bytes(sc.commitment) for sc in state.signed_lo]
            )
            root_hi, _ = merkle.build_tree(
                [self.params.element_to_bytes(sc.commitment) for sc in state.signed_hi]
            )
            edges.append(EdgePublic(lo, hi, True, root_lo, root_hi))
        return KeyGraphPublic(
            n=len(self.participants),
            budget=self.budget,
            participants=self.participants,
            publics={pid: self.signing[pid].public for pid in self.participants},
            edges=tuple(edges),
        )

    def view(self, pid: int) -> "KeyView":
        pads = [dict() for _ in range(self.budget)]
        signed = [dict() for _ in range(self.budget)]
        for peer in self.participants:
            if peer == pid:
                continue
            state = self.edge(pid, peer)
            for slot in range(self.budget):
                pads[slot][peer] = self.round_secret(pid, peer, slot)
            if state.established:
                held = state.signed_lo if pid == state.lo else state.signed_hi
                for slot, sc in enumerate(held):
                    signed[slot][peer] = sc
        return KeyView(self.params, pid, self.signing[pid], self.budget, pads, signed)


class KeyView:
    """One participant's private share of the key graph.

    Tracks which per-round secrets have been consumed; the same slot is
    never handed out twice.
    """

    def __init__(self, params, pid, signing_key, budget, pads, signed):
        self.params = params
        self.pid = pid
        self.signing_key = signing_key
        self.budget = budget
        self.pads = pads        # slot -> {peer: RoundSecret}
        self.signed = signed    # slot -> {peer: SignedCommitment}
        self._next_slot = 0
        self._slot_by_round = {}

    def spend(self, round_id) -> int:
        """Consume the next unspent slot for the given protocol round."""
        if round_id in self._slot_by_round:
            raise RoundBudgetExhausted(f"round {round_id} already consumed a slot")
        if self._next_slot >= self.budget:
            raise RoundBudgetExhausted(f"all {self.budget} scheduled rounds consumed")
        slot = self._next_slot
        self._next_slot += 1
        self._slot_by_round[round_id] = slot
        return slot

    def slot_of(self, round_id) -> int:
        return self._slot_by_round[round_id]

    def pad_sum(self, slot: int) -> int:
        return sum(s.key for s in self.pads[slot].values()) % self.params.q

    def blind_sum(self, slot: int) -> int:
        return sum(s.blind for s in self.pads[slot].values()) % self.params.q

    def aggregate_commitment(self, slot: int) -> int:
        acc = 1
        for peer in sorted(self.pads[slot]):
            s = self.pads[slot][peer]
            acc = acc * commit(self.params, s.key, s.blind) % self.params.p
        return acc

    def published_pairs(self, slot: int):
        """The endorsed per-pair commitments this participant can reveal."""
        return {peer: self.signed[slot][peer] for peer in sorted(self.signed[slot])}


def build_key_graph(
    params: GroupParams,
    participants,
    budget: int,
    rng: random.Random,
    refusers=frozenset(),
) -> KeyGraph:
    participants = sorted(participants)
    signing = {pid: gen_signing_key(params, rng) for pid in participants}
    edges = {}
    for a_idx, lo in enumerate(participants):
        for hi in participants[a_idx + 1 :]:
            try:
                secret, signed_lo, signed_hi = establish_pair(
                    params, lo, hi, rng, budget, signing[lo], signing[hi], refusers
                )
                edges[(lo, hi)] = EdgeState(lo, hi, True, secret, signed_lo, signed_hi)
            except SignatureRefused:
                edges[(lo, hi)] = EdgeState(lo, hi, False)
    return KeyGraph(params, participants, budget, signing, edges)


def aggregate_commitment(graph: KeyGraph, pid: int, slot: int) -> int:
    """Product of the participant's directed pair commitments for a round."""
    params = graph.params
    acc = 1
    for peer in graph.participants:
        if peer == pid:
            continue
        s = graph.round_secret(pid, peer, slot)
        state = graph.edge(pid, peer)
        if not state.established:
            continue  # opted-out edges contribute the identity
        acc = acc * commit(params, s.key, s.blind) % params.p
    return acc


# ---------------------------------------------------------------------------
# batched endorsement of many commitments with one signature


@dataclass(frozen=True)
class BatchSignature:
    root: bytes
    signature: tuple[int, int]
    paths: tuple


def merkle_batch_sign(params: GroupParams, key: SigningKey, commitments) -> BatchSignature:
    """One signature over the Merkle root of a whole commitment list."""
    leaves = [params.element_to_bytes(c) for c in commitments]
    root, paths = merkle.build_tree(leaves)
    return BatchSignature(
        root=root,
        signature=sign(params, key, b"dcmesh/batch/v1" + root),
        paths=tuple(tuple(p) for p in paths),
    )


def verify_leaf(
    params: GroupParams,
    public: int,
    batch: BatchSignature,
    commitment: int,
    index: int,
) -> bool:
    """Check one commitment against a batch signature via its path."""
    if index < 0 or index >= len(batch.paths):
        raise PathInvalid(f"no path at index {index}")
    path = batch.paths[index]
    for entry in path:
        if len(entry) != 2 or not isinstance(entry[0], bytes):
            raise PathInvalid("path entries must be (digest, sibling_is_left)")
    if not merkle.check_path(batch.root, params.element_to_bytes(commitment), path):
        return False
    return verify_sig(params, public, b"dcmesh/batch/v1" + batch.root, batch.signature)
