"""Single-round engine: ciphertexts, round aggregation, investigation.

A round broadcast is the pair (O, c): the pad sum (plus an optional
message) and the aggregate pair-commitment product.  A round is valid
when the commitment product over all participants is the identity;
when it is not, participants publish their endorsed per-pair
commitments and the checks here attribute blame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DuplicateParticipant, MissingParticipant
from .groups import GroupParams
from .keysetup import (
    KeyGraphPublic,
    KeyView,
    SignedCommitment,
    commitment_payload,
    verify_sig,
)
from .zkp import SigmaProof

# verdict reason codes
BAD_SIGNATURE = "bad_signature"
AGGREGATE_MISMATCH = "aggregate_mismatch"
PAIR_MISMATCH = "pair_mismatch"
NON_COOPERATION = "non_cooperation"
INVALID_PROOF = "invalid_proof"
WRONG_BRANCH = "wrong_branch"
STUCK_COLLISION = "stuck_collision"


@dataclass(frozen=True)
class RoundCiphertext:
    participant: int
    round_id: int
    value: int                      # O: pad sum, plus message if sending
    commitment: int                 # c: aggregate pair commitment
    proof: SigmaProof | None = None


@dataclass(frozen=True)
class RoundResult:
    round_id: int
    total: int        # sum of all broadcast values mod q
    valid: bool       # commitment product is the identity
    ciphertexts: tuple[RoundCiphertext, ...]

    def by_participant(self, pid: int) -> RoundCiphertext:
        for ct in self.ciphertexts:
            if ct.participant == pid:
                return ct
        raise MissingParticipant(f"no ciphertext from {pid}")


def make_ciphertext(
    view: KeyView, round_id, message: int | None = None, proof: SigmaProof | None = None
) -> RoundCiphertext:
    """Build this participant's broadcast for one round.

    Consumes the next scheduled per-round secrets (each set is used
    exactly once).  The message, when present, is added to the pad sum
    only; the commitment never depends on it.
    """
    slot = view.spend(round_id)
    value = view.pad_sum(slot)
    if message is not None:
        value = (value + message) % view.params.q
    return RoundCiphertext(
        participant=view.pid,
        round_id=round_id,
        value=value,
        commitment=view.aggregate_commitment(slot),
        proof=proof,
    )


def aggregate_round(
    params: GroupParams, expected_participants, ciphertexts
) -> RoundResult:
    """Sum a round's broadcasts and check commitment validity."""
    expected = set(expected_participants)
    seen = set()
    for ct in ciphertexts:
        if ct.participant in seen:
            raise DuplicateParticipant(f"two ciphertexts from {ct.participant}")
        seen.add(ct.participant)
    if seen != expected:
        raise MissingParticipant(f"missing ciphertexts from {sorted(expected - seen)}")
    total = sum(ct.value for ct in ciphertexts) % params.q
    product = 1
    for ct in ciphertexts:
        product = product * ct.commitment % params.p
    round_id = ciphertexts[0].round_id if ciphertexts else 0
    ordered = tuple(sorted(ciphertexts, key=lambda ct: ct.participant))
    return RoundResult(round_id=round_id, total=total, valid=product == 1, ciphertexts=ordered)


@dataclass
class InvestigationRecord:
    round_id: int
    slot: int
    verdicts: dict = field(default_factory=dict)  # pid -> sorted list of reasons

    def flag(self, pid: int, reason: str) -> None:
        reasons = self.verdicts.setdefault(pid, [])
        if reason not in reasons:
            reasons.append(reason)
            reasons.sort()

    @property
    def cheaters(self) -> set:
        return set(self.verdicts)


def investigate(
    params: GroupParams,
    round_result: RoundResult,
    slot: int,
    published: dict,
    graph_public: KeyGraphPublic,
) -> InvestigationRecord:
    """Attribute blame for a round from published pair commitments.

    ``published`` maps participant -> {peer: SignedCommitment} as each
    participant revealed them.  Checks, per participant: the peer
    endorsements verify, the broadcast aggregate equals the product of
    the revealed pair commitments, and each revealed pair multiplies
    with its reverse to the identity.  A bare pair mismatch with both
    endorsements intact flags both endpoints; anyone whose revealed
    value lacks a valid endorsement is pinned directly.
    """
    record = InvestigationRecord(round_id=round_result.round_id, slot=slot)
    participants = graph_public.participants
    optouts = graph_public.optout_pairs()
    sig_ok: dict[tuple[int, int], bool] = {}

    for pid in participants:
        revealed = published.get(pid)
        if revealed is None:
            record.flag(pid, NON_COOPERATION)
            continue
        expected_peers = {
            peer
            for peer in participants
            if peer != pid and (min(pid, peer), max(pid, peer)) not in optouts
        }
        if set(revealed) != expected_peers:
            record.flag(pid, NON_COOPERATION)
            continue
        product = 1
        for peer, sc in sorted(revealed.items()):
            ok = (
                isinstance(sc, SignedCommitment)
                and sc.holder == pid
                and sc.peer == peer
                and sc.slot == slot
                and verify_sig(
                    params,
                    graph_public.publics[peer],
                    commitment_payload(params, sc.commitment, pid, peer, slot),
                    sc.signature,
                )
            )
            sig_ok[(pid, peer)] = ok
            if not ok:
                record.flag(pid, BAD_SIGNATURE)
            product = product * sc.commitment % params.p
        broadcast = round_result.by_participant(pid).commitment
        if product != broadcast:
            record.flag(pid, AGGREGATE_MISMATCH)

    # pairwise cancellation across the published values
    for idx, a in enumerate(participants):
        for b in participants[idx + 1 :]:
            if (a, b) in optouts:
                continue
            pub_a, pub_b = published.get(a), published.get(b)
            if pub_a is None or pub_b is None:
                continue
            sc_ab, sc_ba = pub_a.get(b), pub_b.get(a)
            if sc_ab is None or sc_ba is None:
                continue
            if sc_ab.commitment * sc_ba.commitment % params.p == 1:
                continue
            a_ok = sig_ok.get((a, b), False)
            b_ok = sig_ok.get((b, a), False)
            if a_ok and not b_ok:
                record.flag(b, PAIR_MISMATCH)
            elif b_ok and not a_ok:
                record.flag(a, PAIR_MISMATCH)
            else:
                # both endorsements check out (or both fail): cannot
                # separate the endpoints, so both are flagged
                record.flag(a, PAIR_MISMATCH)
                record.flag(b, PAIR_MISMATCH)
    return record
