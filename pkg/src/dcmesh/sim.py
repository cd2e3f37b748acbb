"""Deterministic synchronous-broadcast simulator.

Hosts honest and scripted-adversary participant state machines, runs
scenarios session by session (a detected disruptor is banned and the
undelivered senders retry among the survivors), serializes canonical
transcripts, and independently re-verifies them.

Everything is driven by one 64-bit scenario seed: per-participant
randomness, key material and adversary choices are forked from it by
label, so identical scenarios produce byte-identical transcripts.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field, replace

from . import splitter, zkp
from .dcnet import (
    INVALID_PROOF,
    NON_COOPERATION,
    STUCK_COLLISION,
    RoundCiphertext,
    aggregate_round,
    investigate,
    make_ciphertext,
)
from .errors import ConfigInvalid, MalformedRecord, WitnessMismatch
from .groups import SECURITY_LEVELS, GroupParams, derive_params
from .keysetup import (
    EdgePublic,
    KeyGraphPublic,
    SignedCommitment,
    build_key_graph,
)
from .splitter import (
    COLLISION,
    ResolutionTree,
    Verdict,
    encode_slot,
    run_session,
    slot_fits,
    split_decision,
)
from .transcript import Transcript, body_digest, header_digest, record, record_to_line

DOMAIN_TAG = b"dc-mesh/v1"

# adversary strategies; wrong_branch doubles as its verdict reason code
BAD_PAD = "bad_pad"
WRONG_BRANCH = "wrong_branch"
DOUBLE_BRANCH = "double_branch"
MUTATE_MESSAGE = "mutate_message"
LATE_INJECTION = "late_injection"
BAD_SLOT_COUNT = "bad_slot_count"
REFUSE_SIGNATURE = "refuse_signature"
REFUSE_PROOF = "refuse_proof"

STRATEGIES = (
    BAD_PAD,
    WRONG_BRANCH,
    DOUBLE_BRANCH,
    MUTATE_MESSAGE,
    LATE_INJECTION,
    BAD_SLOT_COUNT,
    REFUSE_SIGNATURE,
    REFUSE_PROOF,
)

# strategies that only make sense for a participant who is also a sender
_SENDER_STRATEGIES = (WRONG_BRANCH, DOUBLE_BRANCH, MUTATE_MESSAGE, BAD_SLOT_COUNT)


def fork_rng(seed: int, *labels) -> random.Random:
    """Independent deterministic stream derived from the scenario seed."""
    material = b"dcmesh/rng|" + seed.to_bytes(8, "big", signed=False)
    for label in labels:
        if isinstance(label, int):
            label = str(label)
        if isinstance(label, str):
            label = label.encode()
        material += b"|" + label
    return random.Random(int.from_bytes(hashlib.sha256(material).digest(), "big"))


# ---------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class Scenario:
    n: int
    senders: tuple = ()        # ((participant, payload), ...)
    adversaries: tuple = ()    # ((participant, strategy), ...)
    seed: int = 0
    group: str = "test_medium"
    payload_bits: int = 8
    max_retries: int = 32

    def to_text(self) -> str:
        lines = [
            "dcmesh-scenario v1",
            f"n = {self.n}",
            f"group = {self.group}",
            f"seed = {self.seed}",
            f"payload_bits = {self.payload_bits}",
            f"max_retries = {self.max_retries}",
        ]
        for pid, payload in self.senders:
            lines.append(f"sender = {pid} {payload}")
        for pid, strategy in self.adversaries:
            lines.append(f"adversary = {pid} {strategy}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Scenario":
        lines = [ln.strip() for ln in text.split("\n") if ln.strip()]
        if not lines or lines[0] != "dcmesh-scenario v1":
            raise ConfigInvalid("missing scenario format line 'dcmesh-scenario v1'")
        fields = {}
        senders, adversaries = [], []
        for ln in lines[1:]:
            if "=" not in ln:
                raise ConfigInvalid(f"unparseable scenario line {ln!r}")
            key, value = (part.strip() for part in ln.split("=", 1))
            if key == "sender":
                pid, payload = value.split()
                senders.append((int(pid), int(payload)))
            elif key == "adversary":
                pid, strategy = value.split()
                adversaries.append((int(pid), strategy))
            else:
                fields[key] = value
        try:
            scenario = cls(
                n=int(fields["n"]),
                senders=tuple(senders),
                adversaries=tuple(adversaries),
                seed=int(fields.get("seed", "0")),
                group=fields.get("group", "test_medium"),
                payload_bits=int(fields.get("payload_bits", "8")),
                max_retries=int(fields.get("max_retries", "32")),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigInvalid(f"bad scenario field: {exc}") from exc
        scenario.validate()
        return scenario

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigInvalid("need at least one participant")
        if not 0 <= self.seed < (1 << 64):
            raise ConfigInvalid("seed must fit in 64 bits")
        if self.group not in SECURITY_LEVELS:
            raise ConfigInvalid(f"unknown group {self.group!r}")
        if self.payload_bits < 1:
            raise ConfigInvalid("payload_bits must be positive")
        if self.max_retries < 1:
            raise ConfigInvalid("max_retries must be positive")
        sender_ids = [pid for pid, _ in self.senders]
        if len(set(sender_ids)) != len(sender_ids):
            raise ConfigInvalid("duplicate sender ids")
        adv_ids = [pid for pid, _ in self.adversaries]
        if len(set(adv_ids)) != len(adv_ids):
            raise ConfigInvalid("duplicate adversary ids")
        for pid, payload in self.senders:
            if not 0 <= pid < self.n:
                raise ConfigInvalid(f"sender id {pid} out of range")
            if not 0 <= payload < (1 << self.payload_bits):
                raise ConfigInvalid(f"payload {payload} does not fit payload_bits")
        senders = dict(self.senders)
        for pid, strategy in self.adversaries:
            if not 0 <= pid < self.n:
                raise ConfigInvalid(f"adversary id {pid} out of range")
            if strategy not in STRATEGIES:
                raise ConfigInvalid(f"unknown strategy {strategy!r}")
            if strategy in _SENDER_STRATEGIES and pid not in senders:
                raise ConfigInvalid(f"strategy {strategy} requires a sender payload")
        params = derive_params(self.group, DOMAIN_TAG)
        if not slot_fits(self.n, self.payload_bits, params.q):
            raise ConfigInvalid(
                f"slot encoding for n={self.n}, payload_bits={self.payload_bits} "
                f"overflows the {self.group} group"
            )


# the worked five-message example: payloads, tree slots and thresholds
REFERENCE_SCENARIO = Scenario(
    n=5,
    senders=((0, 36), (1, 11), (2, 28), (3, 17), (4, 38)),
    seed=7,
    group="test_medium",
    payload_bits=8,
)
REFERENCE_NODES = {
    1: (5, 130),
    2: (2, 28),
    3: (3, 102),
    4: (1, 11),
    5: (1, 17),
    6: (1, 28),
    7: (2, 74),
    14: (1, 36),
    15: (1, 38),
}
REFERENCE_THRESHOLDS = {1: 26, 2: 14, 3: 34, 7: 37}
REFERENCE_TRANSMITTED = [1, 2, 4, 6, 14]
REFERENCE_RESOLUTION = [11, 17, 28, 36, 38]


# ---------------------------------------------------------------------------
# participant state machines


class HonestParticipant:
    """Follows the protocol: pads every round, splits by the book,
    proves every non-root broadcast, answers every demand it can."""

    def __init__(self, params, view, payload, payload_bits, rng):
        self.params = params
        self.view = view
        self.pid = view.pid
        self.payload = payload
        self.payload_bits = payload_bits
        self.rng = rng

    def begin_session(self, session, tree, session_tag):
        self.session = session
        self.tree = tree
        self.session_tag = session_tag
        self.broadcasts = {}
        self.blinds = {}
        self.slot_value = (
            None if self.payload is None else encode_slot(self.payload, self.payload_bits)
        )
        self.message_node = None if self.payload is None else 1

    # -- decisions ---------------------------------------------------------

    def _transmit_decision(self, round_id) -> bool:
        if round_id == 1:
            return self.message_node == 1
        parent_id = round_id // 2
        if self.message_node != parent_id:
            return False
        parent = self.tree.nodes[parent_id]
        go_left = split_decision(
            self.payload,
            parent.threshold,
            parent.probabilistic,
            lambda: self.rng.getrandbits(1),
        )
        self.message_node = round_id if go_left else round_id + 1
        return go_left

    def _message_for(self, round_id):
        return self.slot_value if self._transmit_decision(round_id) else None

    # -- protocol surface ----------------------------------------------------

    def broadcast(self, round_id) -> RoundCiphertext:
        message = self._message_for(round_id)
        ct = make_ciphertext(self.view, round_id, message)
        self.broadcasts[round_id] = (ct.value, ct.commitment)
        self.blinds[round_id] = self.view.blind_sum(self.view.slot_of(round_id))
        if round_id != 1:
            ct = replace(ct, proof=self._attach_proof(round_id, message is not None))
        return ct

    def _attach_proof(self, round_id, retransmitted):
        return splitter.prove_retransmission(
            self.params,
            self.broadcasts,
            self.blinds,
            self.pid,
            round_id,
            retransmitted,
            self.rng,
            self.session_tag,
        )

    def respond_demand(self, node_id):
        try:
            return splitter.prove_node_denial(
                self.params,
                self.broadcasts,
                self.blinds,
                self.pid,
                node_id,
                self.rng,
                self.session_tag,
            )
        except WitnessMismatch:
            return None

    def publish_pairs(self, slot):
        return self.view.published_pairs(slot)


class _ForgingAdversary(HonestParticipant):
    """Shared adversary plumbing: when no witness exists for a proof
    obligation, emit a well-shaped forgery instead of staying silent."""

    def _attach_proof(self, round_id, retransmitted):
        for branch_retransmitted in (retransmitted, not retransmitted):
            try:
                return splitter.prove_retransmission(
                    self.params,
                    self.broadcasts,
                    self.blinds,
                    self.pid,
                    round_id,
                    branch_retransmitted,
                    self.rng,
                    self.session_tag,
                )
            except WitnessMismatch:
                continue
        stmt = splitter.retransmission_statement(
            self.params, self.broadcasts, self.pid, round_id, self.session_tag
        )
        return zkp.forge_attempt(self.params, stmt, self.rng)

    def respond_demand(self, node_id):
        try:
            return splitter.prove_node_denial(
                self.params,
                self.broadcasts,
                self.blinds,
                self.pid,
                node_id,
                self.rng,
                self.session_tag,
            )
        except WitnessMismatch:
            stmt = splitter.denial_statement(
                self.params, self.broadcasts, self.pid, node_id, self.session_tag
            )
            return zkp.forge_attempt(self.params, stmt, self.rng)


class BadPadParticipant(_ForgingAdversary):
    """Shifts one pad in the first round without fixing the commitment
    product, so the round's validity check fails."""

    def broadcast(self, round_id):
        ct = super().broadcast(round_id)
        if round_id == 1:
            tampered_value = (ct.value + 1) % self.params.q
            tampered_commitment = ct.commitment * self.params.g % self.params.p
            self.broadcasts[round_id] = (tampered_value, tampered_commitment)
            ct = replace(ct, value=tampered_value, commitment=tampered_commitment)
        return ct


class WrongBranchParticipant(_ForgingAdversary):
    """Retransmits its message against every deterministic split rule."""

    def _transmit_decision(self, round_id):
        if round_id == 1:
            return self.message_node == 1
        parent_id = round_id // 2
        if self.message_node != parent_id:
            return False
        parent = self.tree.nodes[parent_id]
        if parent.probabilistic:
            go_left = bool(self.rng.getrandbits(1))
        else:
            go_left = not (self.payload < parent.threshold)
        self.message_node = round_id if go_left else round_id + 1
        return go_left


class DoubleBranchParticipant(_ForgingAdversary):
    """Behaves honestly for its own path, then re-injects a copy of its
    message into the first split of a collision it is not part of."""

    def begin_session(self, *args):
        super().begin_session(*args)
        self.injected = False

    def _message_for(self, round_id):
        parent_id = round_id // 2
        if (
            round_id != 1
            and not self.injected
            and self.slot_value is not None
            and self.message_node != parent_id
            and self.tree.nodes[parent_id].status == COLLISION
        ):
            self.injected = True
            return self.slot_value
        return super()._message_for(round_id)


class MutateMessageParticipant(_ForgingAdversary):
    """Retransmits a shifted message instead of the one it sent."""

    def begin_session(self, *args):
        super().begin_session(*args)
        self.mutated = False

    def _message_for(self, round_id):
        message = super()._message_for(round_id)
        if message is not None and round_id != 1 and not self.mutated:
            self.mutated = True
            message = (message + 1) % self.params.q
        return message


class LateInjectionParticipant(_ForgingAdversary):
    """Starts silent, then injects a fresh message mid-tree, violating
    blocked access."""

    def __init__(self, *args):
        super().__init__(*args)
        self.inject_payload = self.rng.randrange(1 << self.payload_bits)

    def begin_session(self, *args):
        super().begin_session(*args)
        self.injected = False

    def _message_for(self, round_id):
        if round_id != 1 and not self.injected:
            self.injected = True
            return encode_slot(self.inject_payload, self.payload_bits)
        return super()._message_for(round_id)


class BadSlotCountParticipant(_ForgingAdversary):
    """Sends an initial slot claiming two messages instead of one."""

    def begin_session(self, *args):
        super().begin_session(*args)
        self.slot_value = (2 << self.payload_bits) + self.payload


class RefuseProofParticipant(HonestParticipant):
    """Participates but withholds every proof obligation."""

    def _attach_proof(self, round_id, retransmitted):
        return None

    def respond_demand(self, node_id):
        return None


class RefuseSignatureParticipant(HonestParticipant):
    """Opts out of key setup (handled at graph construction); otherwise
    honest, with all-zero pads on its edges."""


_STRATEGY_CLASSES = {
    BAD_PAD: BadPadParticipant,
    WRONG_BRANCH: WrongBranchParticipant,
    DOUBLE_BRANCH: DoubleBranchParticipant,
    MUTATE_MESSAGE: MutateMessageParticipant,
    LATE_INJECTION: LateInjectionParticipant,
    BAD_SLOT_COUNT: BadSlotCountParticipant,
    REFUSE_SIGNATURE: RefuseSignatureParticipant,
    REFUSE_PROOF: RefuseProofParticipant,
}


# ---------------------------------------------------------------------------
# scenario execution


def _session_budget(n_active: int, max_retries: int) -> int:
    # covers the optimal case (one transmitted round per message) plus a
    # full probabilistic non-split chain and audit slack
    return max(1, n_active) + max_retries + 8


def _keys_digest(key_records) -> str:
    h = hashlib.sha256()
    for rec in key_records:
        h.update(record_to_line(rec).encode())
        h.update(b"\n")
    return h.hexdigest()


def _build_participants(params, scenario, graph, active, pending):
    strategy_of = dict(scenario.adversaries)
    participants = []
    for pid in sorted(active):
        cls = _STRATEGY_CLASSES.get(strategy_of.get(pid), HonestParticipant)
        participants.append(
            cls(
                params,
                graph.view(pid),
                pending.get(pid),
                scenario.payload_bits,
                fork_rng(scenario.seed, "participant", pid),
            )
        )
    return participants


def _key_records(params, session, public: KeyGraphPublic):
    records = []
    for pid in public.participants:
        records.append(record("PUBKEY", session=session, part=pid, y=public.publics[pid]))
    for edge in public.edges:
        records.append(
            record(
                "EDGE",
                session=session,
                lo=edge.lo,
                hi=edge.hi,
                state="shared" if edge.established else "optout",
                root_lo=edge.root_lo.hex() if edge.established else "-",
                root_hi=edge.root_hi.hex() if edge.established else "-",
            )
        )
    return records


def run_scenario(scenario: Scenario) -> Transcript:
    """Execute a scenario to completion and return its transcript.

    Sessions repeat, banning every flagged disruptor, until all honest
    pending messages have been delivered (or no progress is possible,
    which scripted strategies never cause).
    """
    scenario.validate()
    params = derive_params(scenario.group, DOMAIN_TAG)
    digest = scenario.digest()

    header = [
        record("DCMESH", version="v1", hash="sha256"),
        record(
            "GROUP",
            name=params.name,
            p=params.p,
            q=params.q,
            generators=",".join(str(x) for x in params.generators),
            tag=params.domain_tag.hex(),
        ),
        record(
            "CONFIG",
            n=scenario.n,
            payload_bits=scenario.payload_bits,
            max_retries=scenario.max_retries,
            scenario=digest,
        ),
    ]
    header.append(record("HEADEREND", digest=header_digest(header)))

    refusers = {pid for pid, strategy in scenario.adversaries if strategy == REFUSE_SIGNATURE}
    active = list(range(scenario.n))
    pending = dict(scenario.senders)
    body = []
    session = 0
    totals = Counter()

    while True:
        session += 1
        budget = _session_budget(len(active), scenario.max_retries)
        graph = build_key_graph(
            params,
            active,
            budget,
            fork_rng(scenario.seed, "keys", session),
            refusers=refusers & set(active),
        )
        public = graph.public()
        key_records = _key_records(params, session, public)
        body.append(
            record(
                "SESSION",
                idx=session,
                active=",".join(str(pid) for pid in active),
                budget=budget,
                keys=_keys_digest(key_records),
            )
        )
        body.extend(key_records)

        participants = _build_participants(params, scenario, graph, active, pending)
        session_tag = b"dcmesh|" + digest.encode()[:16] + b"|s%d" % session
        outcome = run_session(
            params,
            participants,
            public,
            scenario.payload_bits,
            scenario.max_retries,
            session,
            session_tag,
        )
        body.extend(outcome.records)
        totals["transmitted"] += outcome.transmitted
        totals["delivered"] += len(outcome.resolved)
        totals["proofs_checked"] += outcome.proofs_checked
        totals["proofs_failed"] += outcome.proofs_failed
        totals["verdicts"] += len(outcome.verdicts)

        resolved_counts = Counter(payload for _, payload in outcome.resolved)
        for pid in sorted(pending):
            payload = pending[pid]
            if resolved_counts.get(payload, 0) > 0:
                resolved_counts[payload] -= 1
                del pending[pid]
        banned = {v.participant for v in outcome.verdicts}
        active = [pid for pid in active if pid not in banned]
        for pid in banned:
            pending.pop(pid, None)

        if not pending or not banned or session > scenario.n:
            break

    body.append(
        record(
            "SUMMARY",
            sessions=session,
            delivered=totals["delivered"],
            transmitted=totals["transmitted"],
            proofs_checked=totals["proofs_checked"],
            proofs_failed=totals["proofs_failed"],
            verdicts=totals["verdicts"],
            bind=body_digest(body),
        )
    )
    return Transcript(header=header, records=body)


def single_session(senders, adversaries=(), seed=0, *, n=None, group="test_medium",
                   payload_bits=8, max_retries=32):
    """Run one collision resolution session (no bans, no restarts)."""
    ids = [pid for pid, _ in senders] + [pid for pid, _ in adversaries]
    n = n if n is not None else (max(ids) + 1 if ids else 1)
    scenario = Scenario(
        n=n,
        senders=tuple(senders),
        adversaries=tuple(adversaries),
        seed=seed,
        group=group,
        payload_bits=payload_bits,
        max_retries=max_retries,
    )
    scenario.validate()
    params = derive_params(group, DOMAIN_TAG)
    refusers = {pid for pid, strategy in adversaries if strategy == REFUSE_SIGNATURE}
    active = list(range(n))
    graph = build_key_graph(
        params,
        active,
        _session_budget(n, max_retries),
        fork_rng(seed, "keys", 1),
        refusers=refusers,
    )
    participants = _build_participants(params, scenario, graph, active, dict(senders))
    return run_session(
        params,
        participants,
        graph.public(),
        payload_bits,
        max_retries,
        1,
        b"dcmesh|adhoc|s1",
    )


# ---------------------------------------------------------------------------
# independent transcript verification


@dataclass
class VerificationReport:
    divergences: list = field(default_factory=list)  # (record_index, message)

    @property
    def clean(self) -> bool:
        return not self.divergences

    def add(self, index: int, message: str) -> None:
        self.divergences.append((index, message))


class _Replay:
    """Record-by-record replay of a transcript.

    Recomputes every derivable quantity (round sums, validity bits,
    node classifications, proof verdicts, investigation outcomes,
    demanded denials, bans, summary counters) from the broadcast data
    alone and reports any disagreement with the recorded values.
    """

    def __init__(self, transcript: Transcript):
        self.t = transcript
        self.report = VerificationReport()
        self.pos = 0
        self.base = len(transcript.header)

    def fail(self, message, offset=0):
        self.report.add(self.base + self.pos + offset, message)

    def peek(self):
        if self.pos < len(self.t.records):
            return self.t.records[self.pos]
        return None

    def take(self, rtype=None):
        rec = self.peek()
        if rec is None:
            raise MalformedRecord(self.base + self.pos, "unexpected end of transcript")
        if rtype is not None and rec["type"] != rtype:
            raise MalformedRecord(
                self.base + self.pos, f"expected {rtype}, found {rec['type']}"
            )
        self.pos += 1
        return rec

    # -- header ------------------------------------------------------------

    def check_header(self):
        head = self.t.header
        if not head or head[0]["type"] != "DCMESH":
            raise MalformedRecord(0, "missing format line")
        if head[0]["version"] != "v1" or head[0]["hash"] != "sha256":
            self.report.add(0, "unsupported version or hash")
        types = [r["type"] for r in head]
        if types[-1] != "HEADEREND" or "GROUP" not in types or "CONFIG" not in types:
            raise MalformedRecord(len(head) - 1, "incomplete header")
        group_rec = next(r for r in head if r["type"] == "GROUP")
        try:
            self.params = GroupParams(
                name=group_rec["name"],
                p=group_rec["p"],
                q=group_rec["q"],
                generators=tuple(int(x) for x in group_rec["generators"].split(",")),
                domain_tag=bytes.fromhex(group_rec["tag"]),
            )
            self.params.validate()
        except (ValueError, KeyError) as exc:
            self.report.add(types.index("GROUP"), f"bad group parameters: {exc}")
            raise MalformedRecord(types.index("GROUP"), str(exc)) from exc
        config = next(r for r in head if r["type"] == "CONFIG")
        self.n = config["n"]
        self.payload_bits = config["payload_bits"]
        self.max_retries = config["max_retries"]
        recorded = head[-1]["digest"]
        if recorded != header_digest(head):
            self.report.add(len(head) - 1, "header digest mismatch")

    # -- sessions ------------------------------------------------------------

    def run(self) -> VerificationReport:
        self.check_header()
        expected_active = list(range(self.n))
        session_idx = 0
        totals = Counter()
        while True:
            rec = self.peek()
            if rec is None:
                raise MalformedRecord(self.base + self.pos, "missing SUMMARY record")
            if rec["type"] == "SUMMARY":
                self.take()
                self._check_summary(rec, session_idx, totals)
                if self.peek() is not None:
                    self.fail("records after SUMMARY")
                break
            if rec["type"] != "SESSION":
                raise MalformedRecord(
                    self.base + self.pos, f"expected SESSION or SUMMARY, found {rec['type']}"
                )
            session_idx += 1
            expected_active = self._replay_session(rec, session_idx, expected_active, totals)
        return self.report

    def _replay_session(self, session_rec, session_idx, expected_active, totals):
        rec = self.take("SESSION")
        if rec["idx"] != session_idx:
            self.fail(f"session index {rec['idx']} out of order", -1)
        active = [int(x) for x in rec["active"].split(",") if x != ""]
        if active != expected_active:
            self.fail(f"active set {active} != expected {expected_active}", -1)
        budget = _session_budget(len(active), self.max_retries)
        if rec["budget"] != budget:
            self.fail(f"budget {rec['budget']} != recomputed {budget}", -1)

        key_records = []
        while self.peek() is not None and self.peek()["type"] in ("PUBKEY", "EDGE"):
            key_records.append(self.take())
        if rec["keys"] != _keys_digest(key_records):
            self.fail("key records do not match the session keys digest", -1)
        publics = {}
        edges = []
        for kr in key_records:
            if kr["session"] != session_idx:
                self.fail("key record session mismatch")
            if kr["type"] == "PUBKEY":
                publics[kr["part"]] = kr["y"]
            else:
                edges.append(
                    EdgePublic(kr["lo"], kr["hi"], kr["state"] == "shared")
                )
        if sorted(publics) != active:
            self.fail("PUBKEY records do not cover the active set")
        expected_pairs = {
            (a, b) for i, a in enumerate(active) for b in active[i + 1 :]
        }
        if {(e.lo, e.hi) for e in edges} != expected_pairs:
            self.fail("EDGE records do not cover the active pairs")
        graph_public = KeyGraphPublic(
            n=len(active),
            budget=budget,
            participants=tuple(active),
            publics=publics,
            edges=tuple(edges),
        )

        session_tag = None
        config = next(r for r in self.t.header if r["type"] == "CONFIG")
        session_tag = b"dcmesh|" + config["scenario"].encode()[:16] + b"|s%d" % session_idx

        tree = ResolutionTree(self.params.q, self.payload_bits, self.max_retries)
        broadcasts = {pid: {} for pid in active}
        proofs = {}
        recorded_verdicts = []
        recorded_bans = []
        computed_verdicts = []
        demanded = set()
        stuck_seen = 0
        slot = 0
        aborted = False

        while True:
            rec = self.peek()
            if rec is None or rec["type"] in ("SESSION", "SUMMARY"):
                break
            if rec["type"] == "VERDICT":
                if rec["session"] != session_idx:
                    self.fail("verdict session mismatch")
                recorded_verdicts.append(self.take())
                continue
            if rec["type"] == "BAN":
                if rec["session"] != session_idx:
                    self.fail("ban session mismatch")
                recorded_bans.append(self.take())
                continue
            if aborted:
                self.fail(f"unexpected {rec['type']} after session abort")
                self.take()
                continue
            round_rec = self.take("ROUND")
            rid = round_rec["id"]
            if round_rec["session"] != session_idx:
                self.fail("round session mismatch", -1)
            if tree.next_round() != rid:
                self.fail(f"round {rid} is not next (expected {tree.next_round()})", -1)
                break
            if round_rec["slot"] != slot:
                self.fail(f"slot {round_rec['slot']} != recomputed {slot}", -1)
            cts = []
            for pid in active:
                crec = self.take("CIPHER")
                if crec["part"] != pid or crec["round"] != rid or crec["session"] != session_idx:
                    self.fail("cipher record out of order", -1)
                if not self.params.is_element(crec["c"]):
                    self.fail(f"commitment of {pid} outside the group", -1)
                proof = None
                if crec["proof"] != "-":
                    try:
                        proof = zkp.proof_from_bytes(self.params, bytes.fromhex(crec["proof"]))
                    except ValueError as exc:
                        self.fail(f"undecodable proof: {exc}", -1)
                broadcasts[pid][rid] = (crec["O"] % self.params.q, crec["c"])
                cts.append(
                    RoundCiphertext(pid, rid, crec["O"] % self.params.q, crec["c"], proof)
                )
            agg = self.take("AGGREGATE")
            if agg["session"] != session_idx or agg["round"] != rid:
                self.fail("aggregate record session/round mismatch", -1)
            result = aggregate_round(self.params, active, cts)
            if agg["C"] != result.total:
                self.fail(f"recorded C {agg['C']} != recomputed {result.total}", -1)
            if agg["valid"] != int(result.valid):
                self.fail(f"recorded validity {agg['valid']} != recomputed", -1)
            totals["transmitted"] += 1

            if not result.valid:
                computed_verdicts.extend(
                    self._replay_investigation(session_idx, rid, slot, result, graph_public)
                )
                aborted = True
                continue

            proof_failures = []
            if rid != 1:
                for ct in cts:
                    totals["proofs_checked"] += 1
                    ok = ct.proof is not None and splitter.verify_retransmission(
                        self.params, broadcasts[ct.participant], ct.participant,
                        rid, ct.proof, session_tag,
                    )
                    if not ok:
                        totals["proofs_failed"] += 1
                        reason = NON_COOPERATION if ct.proof is None else INVALID_PROOF
                        proof_failures.append(
                            Verdict(ct.participant, reason, f"round:{rid}")
                        )
            else:
                for ct in cts:
                    if ct.proof is not None:
                        self.fail("unexpected proof attached to the opening round")
            if proof_failures:
                computed_verdicts.extend(proof_failures)
                aborted = True
                continue

            touched = tree.advance(result)
            self._check_nodes(session_idx, tree, touched, totals)
            slot += 1

            while stuck_seen < len(tree.stuck_nodes):
                node_id = tree.stuck_nodes[stuck_seen]
                stuck_seen += 1
                demanded.add(node_id)
                computed_verdicts.extend(
                    self._replay_demand(
                        session_idx, node_id, active, broadcasts, session_tag,
                        STUCK_COLLISION, totals,
                    )
                )

            if tree.done:
                for leaf_id in splitter.audit_wrong_branches(tree):
                    if leaf_id in demanded:
                        continue
                    demanded.add(leaf_id)
                    computed_verdicts.extend(
                        self._replay_demand(
                            session_idx, leaf_id, active, broadcasts, session_tag,
                            WRONG_BRANCH, totals,
                        )
                    )

        if not aborted and not tree.done:
            self.fail("session ended with unresolved rounds")

        recorded_set = sorted(
            (r["part"], r["reason"], r["where"]) for r in recorded_verdicts
        )
        computed_set = sorted((v.participant, v.reason, v.where) for v in computed_verdicts)
        if recorded_set != computed_set:
            self.fail(
                f"verdicts diverge: recorded {recorded_set} != recomputed {computed_set}"
            )
        banned = sorted({v.participant for v in computed_verdicts})
        if sorted(r["part"] for r in recorded_bans) != banned:
            self.fail(f"ban list does not match verdicts {banned}")
        totals["verdicts"] += len(computed_verdicts)
        totals["delivered"] += len(tree.resolved)
        totals["sessions"] = session_idx
        return [pid for pid in active if pid not in banned]

    def _check_nodes(self, session_idx, tree, touched, totals):
        for node_id in touched:
            rec = self.take("NODE")
            snap = tree.snapshot(node_id)
            snap["session"] = session_idx
            for key in ("session", "id", "kind", "count", "total", "status",
                        "probabilistic", "attempt"):
                if rec[key] != snap[key]:
                    self.fail(f"node {node_id}: {key} {rec[key]} != {snap[key]}", -1)
            if str(rec["threshold"]) != str(snap["threshold"]):
                self.fail(f"node {node_id}: threshold mismatch", -1)
            node = tree.nodes[node_id]
            if node.status == "resolved":
                rrec = self.take("RESOLVED")
                if (
                    rrec["node"] != node_id
                    or rrec["payload"] != node.total
                    or rrec["session"] != session_idx
                ):
                    self.fail(f"resolved record mismatch at node {node_id}", -1)

    def _replay_investigation(self, session_idx, rid, slot, result, graph_public):
        published = {}
        while self.peek() is not None and self.peek()["type"] == "PUBLISH":
            rec = self.take()
            if rec["session"] != session_idx or rec["slot"] != slot:
                self.fail("publish record session/slot mismatch", -1)
            published.setdefault(rec["part"], {})[rec["peer"]] = SignedCommitment(
                holder=rec["part"],
                peer=rec["peer"],
                slot=slot,
                commitment=rec["c"],
                signature=(rec["sig_e"], rec["sig_s"]),
            )
        inv_rec = self.take("INVESTIGATION")
        if inv_rec["session"] != session_idx or inv_rec["round"] != rid:
            self.fail("investigation record session/round mismatch", -1)
        inv = investigate(self.params, result, slot, published, graph_public)
        cheaters = ",".join(
            f"{pid}:{'+'.join(inv.verdicts[pid])}" for pid in sorted(inv.verdicts)
        ) or "-"
        if inv_rec["cheaters"] != cheaters:
            self.fail(
                f"investigation verdicts {inv_rec['cheaters']} != recomputed {cheaters}", -1
            )
        return [
            Verdict(pid, reason, f"round:{rid}")
            for pid in sorted(inv.verdicts)
            for reason in inv.verdicts[pid]
        ]

    def _replay_demand(self, session_idx, node_id, active, broadcasts, session_tag,
                       reason, totals):
        verdicts = []
        for pid in active:
            rec = self.take("DEMAND")
            if rec["node"] != node_id or rec["part"] != pid or rec["session"] != session_idx:
                self.fail("demand record out of order", -1)
            proof = None
            if rec["proof"] != "-":
                try:
                    proof = zkp.proof_from_bytes(self.params, bytes.fromhex(rec["proof"]))
                except ValueError as exc:
                    self.fail(f"undecodable demand proof: {exc}", -1)
            ok = proof is not None and splitter.verify_node_denial(
                self.params, broadcasts[pid], pid, node_id, proof, session_tag
            )
            totals["proofs_checked"] += 1
            if not ok:
                totals["proofs_failed"] += 1
            if rec["ok"] != int(ok):
                self.fail(f"demand outcome for {pid} at node {node_id} mismatch", -1)
            if not ok:
                verdicts.append(Verdict(pid, reason, f"node:{node_id}"))
        return verdicts

    def _check_summary(self, rec, sessions, totals):
        expected = {
            "sessions": sessions,
            "delivered": totals["delivered"],
            "transmitted": totals["transmitted"],
            "proofs_checked": totals["proofs_checked"],
            "proofs_failed": totals["proofs_failed"],
            "verdicts": totals["verdicts"],
            "bind": body_digest(self.t.records),
        }
        for key, value in expected.items():
            if rec[key] != value:
                self.fail(f"summary {key} {rec[key]} != recomputed {value}", -1)


def verify_transcript(transcript: Transcript) -> VerificationReport:
    """Recompute everything derivable from a transcript and report
    divergences.  Raises MalformedRecord when the structure itself is
    broken (truncation, unknown records, wrong field types)."""
    replay = _Replay(transcript)
    try:
        return replay.run()
    except MalformedRecord:
        raise
    except (ValueError, KeyError, IndexError, OverflowError) as exc:
        raise MalformedRecord(replay.base + replay.pos, f"unreplayable record: {exc}") from exc
