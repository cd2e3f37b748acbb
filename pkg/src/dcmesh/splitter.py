"""Verifiable superposed receiving: tree-based collision resolution.

Messages are slot tuples (count, payload) packed into one scalar so
that colliding slots add componentwise.  A collision observed in round
k is split over rounds 2k and 2k+1: holders of payloads below the
collision's average retransmit in round 2k, the rest do nothing, and
round 2k+1 is never transmitted -- its aggregate is inferred as
C(k) - C(2k).  That inference gives one delivered message per
transmitted round when all payloads are distinct.

Every participant broadcasts in every transmitted round and attaches,
for every non-root round, a proof that the new broadcast either
carries no message or repeats exactly the message content of the
nearest transmitted ancestor context.  Disruption that survives those
proofs (equal payloads, malformed slots, deliberate wrong branching)
is handled by probabilistic re-splitting, and blame is assigned by
demanding no-message proofs against the offending tree node.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from . import zkp
from .dcnet import (
    INVALID_PROOF,
    NON_COOPERATION,
    STUCK_COLLISION,
    WRONG_BRANCH,
    RoundResult,
    aggregate_round,
    investigate,
)
from .errors import (
    NotACollision,
    PayloadOverflow,
    ProtocolOrderViolation,
)
from .groups import GroupParams
from .transcript import record

# node statuses
PENDING = "pending"
EMPTY = "empty"
RESOLVED = "resolved"
COLLISION = "collision"
STUCK = "stuck"


# ---------------------------------------------------------------------------
# slot encoding


def encode_slot(payload: int, payload_bits: int) -> int:
    """Pack a single message as the slot tuple (1, payload)."""
    if not 0 <= payload < (1 << payload_bits):
        raise PayloadOverflow(f"payload {payload} needs more than {payload_bits} bits")
    return (1 << payload_bits) + payload


def decode_slot(value: int, payload_bits: int) -> tuple[int, int]:
    """Split an aggregate back into (count, payload total)."""
    return value >> payload_bits, value & ((1 << payload_bits) - 1)


def slot_fits(count: int, payload_bits: int, q: int) -> bool:
    """Overflow guard: the largest possible aggregate must stay below q."""
    return count * (1 << payload_bits) + count * ((1 << payload_bits) - 1) < q


def threshold(count: int, total: int) -> int:
    """Split point of a collision: payloads strictly below it go left.

    This is the average rounded up, which makes "payload < threshold"
    coincide with "payload < total/count" for integers, so any
    collision holding two distinct payloads always separates.
    """
    if count < 2:
        raise NotACollision(f"count {count} is not a collision")
    return -(-total // count)


def split_decision(payload: int, t: int | None, probabilistic: bool, coin) -> bool:
    """True when this payload retransmits in the left (2k) round.

    Deterministic splits send strictly-below-threshold payloads left
    and everything else (ties included) right; probabilistic splits
    flip the supplied coin.
    """
    if probabilistic:
        return bool(coin())
    return payload < t


# ---------------------------------------------------------------------------
# the resolution tree


def node_kind(node_id: int) -> str:
    return "transmitted" if node_id == 1 or node_id % 2 == 0 else "inferred"


@dataclass
class TreeNode:
    round_id: int
    aggregate: int | None = None
    count: int | None = None
    total: int | None = None
    status: str = PENDING
    threshold: int | None = None
    probabilistic: bool = False
    attempt: int = 0          # position in a consecutive non-split chain
    split_ok: bool | None = None

    @property
    def kind(self) -> str:
        return node_kind(self.round_id)


class ResolutionTree:
    """Shared public state of one collision resolution session.

    Children of node k are 2k (transmitted) and 2k+1 (inferred), the
    frontier of pending transmitted rounds is processed in increasing
    round id, and no new message may enter until the tree is done.
    """

    def __init__(self, q: int, payload_bits: int, max_retries: int):
        self.q = q
        self.payload_bits = payload_bits
        self.max_retries = max_retries
        self.nodes: dict[int, TreeNode] = {1: TreeNode(1)}
        self._frontier = [1]
        self.transmitted_order: list[int] = []
        self.resolved: list[tuple[int, int]] = []   # (node_id, payload)
        self.stuck_nodes: list[int] = []
        self.split_attempts: list[int] = []         # non-split chain lengths at first split
        self.blocked = False
        self._touched: list[int] = []

    def next_round(self) -> int | None:
        return self._frontier[0] if self._frontier else None

    @property
    def done(self) -> bool:
        return not self._frontier

    def advance(self, result: RoundResult) -> list[int]:
        """Fold one transmitted round into the tree.

        Returns the ids of nodes whose classification changed, in
        increasing order (used for transcript emission and replay).
        """
        if not self._frontier or result.round_id != self._frontier[0]:
            raise ProtocolOrderViolation(
                f"round {result.round_id} is not next (expected {self.next_round()})"
            )
        heapq.heappop(self._frontier)
        self._touched = []
        rid = result.round_id
        node = self.nodes[rid]
        node.aggregate = result.total
        self.transmitted_order.append(rid)
        self._classify(node)
        if rid == 1:
            if node.status == COLLISION:
                self.blocked = True
                self._schedule_split(node)
        else:
            parent = self.nodes[rid // 2]
            sibling = self.nodes[rid + 1]
            sibling.aggregate = (parent.aggregate - node.aggregate) % self.q
            self._classify(sibling)
            self._check_split(parent, node, sibling)
        if self.done:
            self.blocked = False
        return sorted(set(self._touched))

    def _classify(self, node: TreeNode) -> None:
        node.count, node.total = decode_slot(node.aggregate, self.payload_bits)
        if node.count == 0:
            node.status = EMPTY
        elif node.count == 1:
            node.status = RESOLVED
            self.resolved.append((node.round_id, node.total))
        else:
            node.status = COLLISION
        self._touched.append(node.round_id)

    def _schedule_split(self, node: TreeNode) -> None:
        if not node.probabilistic:
            node.threshold = threshold(node.count, node.total)
        left = TreeNode(2 * node.round_id)
        right = TreeNode(2 * node.round_id + 1)
        self.nodes[left.round_id] = left
        self.nodes[right.round_id] = right
        heapq.heappush(self._frontier, left.round_id)

    def _check_split(self, parent: TreeNode, left: TreeNode, right: TreeNode) -> None:
        clean = (
            left.count + right.count == parent.count
            and left.count > 0
            and right.count > 0
        )
        parent.split_ok = clean
        if clean and parent.attempt > 0:
            self.split_attempts.append(parent.attempt)
        for child in (left, right):
            if child.status != COLLISION:
                continue
            if clean:
                # real progress: inherit the splitting mode, reset the chain
                child.probabilistic = parent.probabilistic
                child.attempt = 0
            else:
                # the collision survived intact (or the slot arithmetic is
                # inconsistent): fall back to coin-flip splitting
                child.probabilistic = True
                child.attempt = parent.attempt + 1
                if child.attempt > self.max_retries:
                    child.status = STUCK
                    self.stuck_nodes.append(child.round_id)
                    self._touched.append(child.round_id)
                    continue
            self._schedule_split(child)

    def snapshot(self, node_id: int) -> dict:
        node = self.nodes[node_id]
        return record(
            "NODE",
            session=0,  # filled in by the caller
            id=node.round_id,
            kind=node.kind,
            count=node.count,
            total=node.total,
            status=node.status,
            threshold="-" if node.threshold is None else node.threshold,
            probabilistic=int(node.probabilistic),
            attempt=node.attempt,
        )


# ---------------------------------------------------------------------------
# per-participant branch contexts and proofs
#
# ``broadcasts`` maps round id -> (O, c) for one participant; ``blinds``
# maps round id -> that participant's blinding sum for the round.  Both
# recursions accumulate along the path of inferred nodes, mirroring how
# the tree itself infers aggregates.


def branch_context(params: GroupParams, broadcasts: dict, node_id: int) -> tuple[int, int]:
    """(value, commitment) context of one participant at a tree node."""
    if node_kind(node_id) == "transmitted":
        return broadcasts[node_id]
    value, gamma = branch_context(params, broadcasts, node_id // 2)
    o_sib, c_sib = broadcasts[node_id - 1]
    return (value - o_sib) % params.q, gamma * pow(c_sib, -1, params.p) % params.p


def blind_context(params: GroupParams, blinds: dict, node_id: int) -> int:
    """Blinding-sum witness matching :func:`branch_context`."""
    if node_kind(node_id) == "transmitted":
        return blinds[node_id]
    return (blind_context(params, blinds, node_id // 2) - blinds[node_id - 1]) % params.q


def _retrans_context_tag(session_tag: bytes, pid: int, round_id: int) -> bytes:
    return session_tag + b"|retrans|%d|%d" % (pid, round_id)


def _denial_context_tag(session_tag: bytes, pid: int, node_id: int) -> bytes:
    return session_tag + b"|denial|%d|%d" % (pid, node_id)


def retransmission_statement(
    params: GroupParams, broadcasts: dict, pid: int, round_id: int, session_tag: bytes
) -> zkp.OrStatement:
    """Either this broadcast carries nothing, or it repeats the parent context."""
    ctx = _retrans_context_tag(session_tag, pid, round_id)
    value, commitment = broadcasts[round_id]
    parent_value, parent_gamma = branch_context(params, broadcasts, round_id // 2)
    return zkp.OrStatement(
        (
            zkp.stmt_no_message(params, value, commitment, ctx),
            zkp.stmt_same_message(params, parent_value, parent_gamma, value, commitment, ctx),
        )
    )


def prove_retransmission(
    params: GroupParams,
    broadcasts: dict,
    blinds: dict,
    pid: int,
    round_id: int,
    retransmitted: bool,
    rng,
    session_tag: bytes,
) -> zkp.SigmaProof:
    stmt = retransmission_statement(params, broadcasts, pid, round_id, session_tag)
    if retransmitted:
        alpha = (blind_context(params, blinds, round_id // 2) - blinds[round_id]) % params.q
        return zkp.prove_or(params, stmt, 1, alpha, rng)
    return zkp.prove_or(params, stmt, 0, blinds[round_id], rng)


def verify_retransmission(
    params: GroupParams,
    broadcasts: dict,
    pid: int,
    round_id: int,
    proof: zkp.SigmaProof,
    session_tag: bytes,
) -> bool:
    stmt = retransmission_statement(params, broadcasts, pid, round_id, session_tag)
    return zkp.verify_or(params, stmt, proof)


def denial_statement(
    params: GroupParams, broadcasts: dict, pid: int, node_id: int, session_tag: bytes
) -> zkp.RepStatement:
    """Claim that this participant's context at a node carries no message."""
    value, gamma = branch_context(params, broadcasts, node_id)
    return zkp.stmt_no_message(
        params, value, gamma, _denial_context_tag(session_tag, pid, node_id)
    )


def prove_node_denial(
    params: GroupParams,
    broadcasts: dict,
    blinds: dict,
    pid: int,
    node_id: int,
    rng,
    session_tag: bytes,
) -> zkp.SigmaProof:
    stmt = denial_statement(params, broadcasts, pid, node_id, session_tag)
    return zkp.prove_rep(params, stmt, blind_context(params, blinds, node_id), rng)


def verify_node_denial(
    params: GroupParams,
    broadcasts: dict,
    pid: int,
    node_id: int,
    proof: zkp.SigmaProof,
    session_tag: bytes,
) -> bool:
    stmt = denial_statement(params, broadcasts, pid, node_id, session_tag)
    return zkp.verify_rep(params, stmt, proof)


# ---------------------------------------------------------------------------
# session engine


@dataclass(frozen=True)
class Verdict:
    participant: int
    reason: str
    where: str


@dataclass
class SessionOutcome:
    session: int
    resolved: list = field(default_factory=list)       # (node_id, payload) in order
    transmitted: int = 0
    verdicts: list = field(default_factory=list)
    records: list = field(default_factory=list)
    tree: ResolutionTree | None = None
    aborted: bool = False
    proofs_checked: int = 0
    proofs_failed: int = 0


def audit_wrong_branches(tree: ResolutionTree) -> list[int]:
    """Leaves whose payload contradicts a deterministic ancestor split.

    Probabilistic splits carry no payload rule, so only deterministic
    collision nodes are audited.  Returns offending leaf node ids.
    """
    offending = []
    for leaf_id, payload in tree.resolved:
        node_id = leaf_id
        while node_id > 1:
            parent = tree.nodes[node_id // 2]
            went_left = node_id % 2 == 0
            if (
                parent.status == COLLISION
                and not parent.probabilistic
                and parent.threshold is not None
            ):
                should_left = payload < parent.threshold
                if went_left != should_left:
                    offending.append(leaf_id)
                    break
            node_id = node_id // 2
    return offending


def run_session(
    params: GroupParams,
    participants: list,
    graph_public,
    payload_bits: int,
    max_retries: int,
    session: int,
    session_tag: bytes,
) -> SessionOutcome:
    """Drive one blocked-access collision resolution to completion.

    Participants are duck-typed state machines (see the simulator
    module); all scheduling state here is a pure function of the
    broadcasts, which is what lets an independent verifier replay it.
    """
    tree = ResolutionTree(params.q, payload_bits, max_retries)
    outcome = SessionOutcome(session=session, tree=tree)
    participants = sorted(participants, key=lambda p: pid_of(p))
    pids = [pid_of(p) for p in participants]
    for p in participants:
        p.begin_session(session, tree, session_tag)

    broadcasts = {pid: {} for pid in pids}   # pid -> round -> (O, c)
    demanded: set[int] = set()
    stuck_seen = 0
    slot = 0

    while not tree.done:
        rid = tree.next_round()
        outcome.records.append(record("ROUND", session=session, id=rid, slot=slot))
        cts = [p.broadcast(rid) for p in participants]
        for ct in cts:
            broadcasts[ct.participant][rid] = (ct.value, ct.commitment)
            outcome.records.append(
                record(
                    "CIPHER",
                    session=session,
                    round=rid,
                    part=ct.participant,
                    O=ct.value,
                    c=ct.commitment,
                    proof="-" if ct.proof is None else zkp.proof_to_bytes(params, ct.proof).hex(),
                )
            )
        result = aggregate_round(params, pids, cts)
        outcome.records.append(
            record("AGGREGATE", session=session, round=rid, C=result.total, valid=int(result.valid))
        )
        outcome.transmitted += 1

        if not result.valid:
            _run_investigation(params, participants, graph_public, result, slot, session, outcome)
            outcome.aborted = True
            break

        if rid != 1:
            bad = []
            for ct in cts:
                outcome.proofs_checked += 1
                if ct.proof is None:
                    bad.append(Verdict(ct.participant, NON_COOPERATION, f"round:{rid}"))
                    outcome.proofs_failed += 1
                elif not verify_retransmission(
                    params, broadcasts[ct.participant], ct.participant, rid, ct.proof, session_tag
                ):
                    bad.append(Verdict(ct.participant, INVALID_PROOF, f"round:{rid}"))
                    outcome.proofs_failed += 1
            if bad:
                outcome.verdicts.extend(bad)
                outcome.aborted = True
                break

        touched = tree.advance(result)
        _emit_nodes(tree, touched, session, outcome)
        slot += 1

        while stuck_seen < len(tree.stuck_nodes):
            node_id = tree.stuck_nodes[stuck_seen]
            stuck_seen += 1
            demanded.add(node_id)
            _run_demand(
                params, participants, broadcasts, node_id, STUCK_COLLISION,
                session, session_tag, outcome,
            )

    if not outcome.aborted:
        for leaf_id in audit_wrong_branches(tree):
            if leaf_id in demanded:
                continue
            demanded.add(leaf_id)
            _run_demand(
                params, participants, broadcasts, leaf_id, WRONG_BRANCH,
                session, session_tag, outcome,
            )

    outcome.resolved = list(tree.resolved)
    for verdict in outcome.verdicts:
        outcome.records.append(
            record(
                "VERDICT",
                session=session,
                part=verdict.participant,
                reason=verdict.reason,
                where=verdict.where,
            )
        )
    for pid in sorted({v.participant for v in outcome.verdicts}):
        outcome.records.append(record("BAN", session=session, part=pid))
    return outcome


def _emit_nodes(tree, touched, session, outcome):
    for node_id in touched:
        snap = tree.snapshot(node_id)
        snap["session"] = session
        outcome.records.append(snap)
        node = tree.nodes[node_id]
        if node.status == RESOLVED:
            outcome.records.append(
                record("RESOLVED", session=session, node=node_id, payload=node.total)
            )


def _run_investigation(params, participants, graph_public, result, slot, session, outcome):
    published = {}
    for p in participants:
        pairs = p.publish_pairs(slot)
        if pairs is None:
            continue
        published[pid_of(p)] = pairs
        for peer, sc in sorted(pairs.items()):
            outcome.records.append(
                record(
                    "PUBLISH",
                    session=session,
                    slot=slot,
                    part=pid_of(p),
                    peer=peer,
                    c=sc.commitment,
                    sig_e=sc.signature[0],
                    sig_s=sc.signature[1],
                )
            )
    inv = investigate(params, result, slot, published, graph_public)
    cheaters = ",".join(
        f"{pid}:{'+'.join(inv.verdicts[pid])}" for pid in sorted(inv.verdicts)
    )
    outcome.records.append(
        record(
            "INVESTIGATION",
            session=session,
            round=result.round_id,
            cheaters=cheaters or "-",
        )
    )
    for pid in sorted(inv.verdicts):
        for reason in inv.verdicts[pid]:
            outcome.verdicts.append(Verdict(pid, reason, f"round:{result.round_id}"))


def _run_demand(
    params, participants, broadcasts, node_id, reason, session, session_tag, outcome
):
    """Ask every participant to deny carrying a message at a node."""
    for p in participants:
        pid = pid_of(p)
        proof = p.respond_demand(node_id)
        ok = proof is not None and verify_node_denial(
            params, broadcasts[pid], pid, node_id, proof, session_tag
        )
        outcome.proofs_checked += 1
        if not ok:
            outcome.proofs_failed += 1
        outcome.records.append(
            record(
                "DEMAND",
                session=session,
                node=node_id,
                part=pid,
                ok=int(ok),
                proof="-" if proof is None else zkp.proof_to_bytes(params, proof).hex(),
            )
        )
        if not ok:
            outcome.verdicts.append(Verdict(pid, reason, f"node:{node_id}"))


def pid_of(participant) -> int:
    return participant.pid


def resolve(senders, adversaries=(), seed: int = 0, **config) -> SessionOutcome:
    """One-shot collision resolution session over a fresh key graph.

    ``senders`` is a list of (participant id, payload); ``adversaries``
    a list of (participant id, strategy name).  Convenience entry point
    for a single session; scenario orchestration with bans and restarts
    lives in the simulator module.
    """
    from . import sim  # participant factories; deferred to avoid an import cycle

    return sim.single_session(senders, adversaries, seed, **config)
