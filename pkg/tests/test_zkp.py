"""Sigma protocol properties: completeness, soundness, zero-knowledge.

Soundness is checked at desk scale with an actual rewinding extractor,
and zero-knowledge structurally: over the full challenge space of the
small group, real and simulated transcripts form identical multisets.
"""

import random
from collections import Counter

import pytest

from dcmesh.errors import EmptyClauseList, WitnessMismatch
from dcmesh.groups import commit
from dcmesh.zkp import (
    FlatProver,
    OrStatement,
    RepStatement,
    SigmaProof,
    forge_attempt,
    fs_challenge,
    proof_from_bytes,
    proof_to_bytes,
    prove_and_of_or,
    prove_or,
    prove_rep,
    simulate_block,
    stmt_no_message,
    stmt_same_message,
    verify_and_of_or,
    verify_or,
    verify_rep,
)


def rep_for(params, alpha, context=b"t"):
    return RepStatement(target=pow(params.h, alpha, params.p), base=params.h, context=context)


# ---------------------------------------------------------------------------
# challenge derivation


def test_fs_challenge_deterministic(small):
    a = fs_challenge(small, b"stmt", [4, 9])
    b = fs_challenge(small, b"stmt", [4, 9])
    assert a == b
    assert 0 <= a < small.q


def test_fs_challenge_sensitivity(small):
    base = fs_challenge(small, b"stmt", [4, 9])
    # single-byte changes move the challenge for the vast majority of inputs
    changed = sum(
        fs_challenge(small, bytes([i]) + b"tmt", [4, 9]) != base for i in range(256)
    )
    assert changed > 230


def test_fs_challenge_empty_inputs(small):
    assert 0 <= fs_challenge(small, b"", []) < small.q


# ---------------------------------------------------------------------------
# knowledge of a single representation


def test_rep_completeness_random(small):
    rng = random.Random(11)
    for _ in range(1000):
        alpha = rng.randrange(small.q)
        stmt = rep_for(small, alpha)
        proof = prove_rep(small, stmt, alpha, rng)
        assert verify_rep(small, stmt, proof)


def test_rep_zero_witness_identity_target(small):
    rng = random.Random(1)
    stmt = rep_for(small, 0)
    assert stmt.target == 1
    assert verify_rep(small, stmt, prove_rep(small, stmt, 0, rng))


def test_rep_wrong_witness_refused(small):
    stmt = rep_for(small, 5)
    with pytest.raises(WitnessMismatch):
        prove_rep(small, stmt, 6, random.Random(0))


def test_rep_tampered_response_rejected(small):
    rng = random.Random(3)
    stmt = rep_for(small, 21)
    proof = prove_rep(small, stmt, 21, rng)
    block = proof.blocks[0]
    bad = SigmaProof(
        proof.statement_digest,
        (type(block)(block.commitments, block.challenge, (block.response + 1) % small.q),),
    )
    assert not verify_rep(small, stmt, bad)


def test_statement_byte_binding(small):
    rng = random.Random(4)
    stmt = rep_for(small, 9, context=b"round-7")
    proof = prove_rep(small, stmt, 9, rng)
    other = RepStatement(stmt.target, stmt.base, b"round-8")
    assert verify_rep(small, stmt, proof)
    assert not verify_rep(small, other, proof)


# ---------------------------------------------------------------------------
# OR composition


def or_pair(params, alpha, true_branch, rng):
    """Two-branch statement where only ``true_branch`` has a known witness."""
    decoy = RepStatement(
        target=pow(params.h, rng.randrange(params.q), params.p)
        * params.g % params.p,  # witness would require the dlog of g base h
        base=params.h,
        context=b"decoy",
    )
    true = rep_for(params, alpha, context=b"true")
    branches = [decoy, decoy]
    branches[true_branch] = true
    return OrStatement(tuple(branches))


def test_or_completeness_both_sides(small):
    rng = random.Random(5)
    for true_branch in (0, 1):
        alpha = rng.randrange(small.q)
        stmt = or_pair(small, alpha, true_branch, rng)
        proof = prove_or(small, stmt, true_branch, alpha, rng)
        assert verify_or(small, stmt, proof)


def test_or_wrong_branch_witness_refused(small):
    rng = random.Random(6)
    stmt = or_pair(small, 13, 0, rng)
    with pytest.raises(WitnessMismatch):
        prove_or(small, stmt, 1, 13, rng)


def test_or_challenge_split_tampering_rejected(small):
    rng = random.Random(7)
    stmt = or_pair(small, 22, 0, rng)
    proof = prove_or(small, stmt, 0, 22, rng)
    b0, b1 = proof.blocks
    shifted = SigmaProof(
        proof.statement_digest,
        (
            type(b0)(b0.commitments, (b0.challenge + 1) % small.q, b0.response),
            type(b1)(b1.commitments, (b1.challenge - 1) % small.q, b1.response),
        ),
    )
    # sum is still right, but the per-branch equations now fail
    assert sum(b.challenge for b in shifted.blocks) % small.q == sum(
        b.challenge for b in proof.blocks
    ) % small.q
    assert not verify_or(small, stmt, shifted)


def test_or_hiding_structure(small):
    """Swapping which branch is true changes nothing observable."""
    rng = random.Random(8)
    alpha = 31
    true_target = pow(small.h, alpha, small.p)
    # both branches satisfiable by construction, so either index proves
    stmt = OrStatement(
        (
            RepStatement(true_target, small.h, b"left"),
            RepStatement(true_target, small.h, b"right"),
        )
    )
    sizes = set()
    first_challenges = {0: Counter(), 1: Counter()}
    for true_branch in (0, 1):
        for _ in range(250):
            proof = prove_or(small, stmt, true_branch, alpha, rng)
            assert verify_or(small, stmt, proof)
            sizes.add(len(proof_to_bytes(small, proof)))
            first_challenges[true_branch][proof.blocks[0].challenge] += 1
    assert len(sizes) == 1
    # the first branch's challenge spreads over the space either way; no
    # field separates the proofs by which branch was real
    assert len(first_challenges[0]) > 30
    assert len(first_challenges[1]) > 30


# ---------------------------------------------------------------------------
# shared-witness conjunctions


def test_conjunction_single_clause_matches_or(small):
    rng = random.Random(9)
    alpha = 17
    stmt = or_pair(small, alpha, 0, rng)
    proof = prove_and_of_or(small, [stmt], [0], alpha, rng)
    assert verify_and_of_or(small, [stmt], proof)
    assert len(proof.blocks) == 2  # same block shape as a plain two-branch OR


def test_conjunction_shared_witness_accepts(small):
    rng = random.Random(10)
    alpha = 3
    c1 = or_pair(small, alpha, 0, rng)
    c2 = or_pair(small, alpha, 1, rng)
    proof = prove_and_of_or(small, [c1, c2], [0, 1], alpha, rng)
    assert verify_and_of_or(small, [c1, c2], proof)


def test_conjunction_mixed_witnesses_refused(small):
    rng = random.Random(11)
    c1 = or_pair(small, 3, 0, rng)
    c2 = or_pair(small, 4, 0, rng)  # needs a different witness
    with pytest.raises(WitnessMismatch):
        prove_and_of_or(small, [c1, c2], [0, 0], 3, rng)


def test_conjunction_empty_clause_list_rejected(small):
    with pytest.raises(EmptyClauseList):
        prove_and_of_or(small, [], [], 0, random.Random(0))


def test_conjunction_completeness_random(small):
    rng = random.Random(12)
    for _ in range(50):
        alpha = rng.randrange(small.q)
        clauses = []
        truth = []
        for _ in range(rng.randrange(1, 4)):
            branch = rng.randrange(2)
            clauses.append(or_pair(small, alpha, branch, rng))
            truth.append(branch)
        proof = prove_and_of_or(small, clauses, truth, alpha, rng)
        assert verify_and_of_or(small, clauses, proof)


# ---------------------------------------------------------------------------
# special soundness: the rewinding extractor


def extract_flat(params, disjuncts, prover, e1, e2):
    """Two-transcript extractor for the flat OR core."""
    blocks1 = prover.respond(e1)
    blocks2 = prover.respond(e2)
    for atoms, b1, b2 in zip(disjuncts, blocks1, blocks2):
        if b1.challenge == b2.challenge:
            continue
        de = (b1.challenge - b2.challenge) % params.q
        dz = (b1.response - b2.response) % params.q
        alpha = dz * pow(de, -1, params.q) % params.q
        # the recovered witness must satisfy every atom of the disjunct
        for target, base in atoms:
            assert pow(base, alpha, params.p) == target
        return alpha
    raise AssertionError("no differing branch challenge; extraction impossible")


def test_extractor_rep_family(small):
    rng = random.Random(13)
    for alpha in (0, 1, 29, 52):
        stmt = rep_for(small, alpha)
        disjuncts = [[(stmt.target, stmt.base)]]
        prover = FlatProver(small, disjuncts, 0, alpha, rng)
        assert extract_flat(small, disjuncts, prover, 3, 17) == alpha


def test_extractor_or_family(small):
    rng = random.Random(14)
    for alpha in (5, 40):
        for branch in (0, 1):
            stmt = or_pair(small, alpha, branch, rng)
            disjuncts = [[(b.target, b.base)] for b in stmt.branches]
            prover = FlatProver(small, disjuncts, branch, alpha, rng)
            for e1 in range(0, 10):
                e2 = (e1 + 7) % small.q
                got = extract_flat(small, disjuncts, prover, e1, e2)
                assert got == alpha


def test_extractor_conjunction_family(small):
    rng = random.Random(15)
    alpha = 23
    c1 = or_pair(small, alpha, 0, rng)
    c2 = or_pair(small, alpha, 1, rng)
    from dcmesh.zkp import _conjunction_disjuncts

    selections, disjuncts = _conjunction_disjuncts([c1, c2])
    prover = FlatProver(small, disjuncts, selections.index((0, 1)), alpha, rng)
    assert extract_flat(small, disjuncts, prover, 2, 31) == alpha


# ---------------------------------------------------------------------------
# zero-knowledge: exhaustive transcript distributions at q = 53


def test_simulated_transcripts_match_real_exactly(small):
    """Full enumeration: {(t,e,z)} from real provers equals the
    simulator's set, so transcripts carry no information about alpha
    beyond the statement itself.  A chi-square over the enumeration is
    identically zero because the multisets are equal."""
    alpha = 19
    stmt = rep_for(small, alpha)
    atoms = [(stmt.target, stmt.base)]
    q, p, h = small.q, small.p, small.h
    real = Counter()
    for w in range(q):
        t = pow(h, w, p)
        for e in range(q):
            z = (w + e * alpha) % q
            real[(t, e, z)] += 1
    simulated = Counter()
    for z in range(q):
        for e in range(q):
            (t,) = simulate_block(small, atoms, e, z)
            simulated[(t, e, z)] += 1
    assert real == simulated
    chi_square = sum(
        (real[k] - simulated[k]) ** 2 / simulated[k] for k in simulated
    )
    assert chi_square == 0


def test_simulator_transcripts_verify_interactively(small):
    """Challenge-first simulation satisfies the verification equation for
    every possible challenge and serializes to the same byte length as a
    real proof."""
    rng = random.Random(16)
    alpha = 44
    stmt = rep_for(small, alpha)
    real = prove_rep(small, stmt, alpha, rng)
    p, h = small.p, small.h
    for e in range(small.q):
        z = rng.randrange(small.q)
        (t,) = simulate_block(small, [(stmt.target, stmt.base)], e, z)
        assert pow(h, z, p) == t * pow(stmt.target, e, p) % p
        fake = SigmaProof(real.statement_digest, (type(real.blocks[0])((t,), e, z),))
        assert len(proof_to_bytes(small, fake)) == len(proof_to_bytes(small, real))


# ---------------------------------------------------------------------------
# statement builders


def test_no_message_statement_honest_case(small):
    rng = random.Random(17)
    for _ in range(50):
        pad, blind = rng.randrange(53), rng.randrange(53)
        c = commit(small, pad, blind)
        stmt = stmt_no_message(small, pad, c)
        proof = prove_rep(small, stmt, blind, rng)
        assert verify_rep(small, stmt, proof)


def test_no_message_statement_with_message_unprovable(small):
    rng = random.Random(18)
    pad, blind, message = 12, 30, 7
    c = commit(small, pad, blind)
    stmt = stmt_no_message(small, (pad + message) % 53, c)
    with pytest.raises(WitnessMismatch):
        prove_rep(small, stmt, blind, rng)


def test_no_message_identity_case(small):
    stmt = stmt_no_message(small, 0, 1)
    assert stmt.target == 1
    proof = prove_rep(small, stmt, 0, random.Random(19))
    assert verify_rep(small, stmt, proof)


def test_same_message_statement_cases(small):
    rng = random.Random(20)
    q = small.q
    for _ in range(50):
        pad1, blind1, pad2, blind2 = (rng.randrange(q) for _ in range(4))
        message = rng.randrange(q)
        c1, c2 = commit(small, pad1, blind1), commit(small, pad2, blind2)
        v1, v2 = (pad1 + message) % q, (pad2 + message) % q
        stmt = stmt_same_message(small, v1, c1, v2, c2)
        proof = prove_rep(small, stmt, (blind1 - blind2) % q, rng)
        assert verify_rep(small, stmt, proof)
    # identical tuples need witness zero
    c = commit(small, 5, 6)
    stmt = stmt_same_message(small, 11, c, 11, c)
    assert stmt.target == 1
    # different messages leave no witness for the honest blinding delta
    c1, c2 = commit(small, 3, 8), commit(small, 9, 2)
    stmt = stmt_same_message(small, 3 + 20, c1, (9 + 21) % q, c2)
    with pytest.raises(WitnessMismatch):
        prove_rep(small, stmt, (8 - 2) % q, rng)


# ---------------------------------------------------------------------------
# deliberate forgeries and serialization


def test_forge_attempt_always_rejected(small):
    rng = random.Random(21)
    for _ in range(100):
        alpha = rng.randrange(small.q)
        stmt = or_pair(small, alpha, 0, rng)
        forged = forge_attempt(small, stmt, rng)
        assert len(forged.blocks) == 2
        assert not verify_or(small, stmt, forged)


def test_forge_attempt_rep_and_conjunction(small):
    rng = random.Random(22)
    stmt = rep_for(small, 10)
    assert not verify_rep(small, stmt, forge_attempt(small, stmt, rng))
    clauses = [or_pair(small, 4, 0, rng), or_pair(small, 4, 1, rng)]
    assert not verify_and_of_or(small, clauses, forge_attempt(small, clauses, rng))


def test_proof_serialization_roundtrip(small, medium):
    rng = random.Random(23)
    for params in (small, medium):
        alpha = rng.randrange(params.q)
        stmt = or_pair(params, alpha, 1, rng)
        proof = prove_or(params, stmt, 1, alpha, rng)
        data = proof_to_bytes(params, proof)
        again = proof_from_bytes(params, data)
        assert again == proof
        assert verify_or(params, stmt, again)
        with pytest.raises(ValueError):
            proof_from_bytes(params, data[:-1])
        with pytest.raises(ValueError):
            proof_from_bytes(params, data + b"\x00")
