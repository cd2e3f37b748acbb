"""Pairwise setup: antisymmetry, endorsements, opt-outs, batching."""

import random

import pytest

from dcmesh.errors import PathInvalid, RoundBudgetExhausted, SignatureRefused
from dcmesh.groups import commit
from dcmesh.keysetup import (
    aggregate_commitment,
    build_key_graph,
    commitment_payload,
    establish_pair,
    gen_signing_key,
    merkle_batch_sign,
    sign,
    verify_leaf,
    verify_sig,
)


def test_signature_roundtrip(small):
    rng = random.Random(0)
    key = gen_signing_key(small, rng)
    sig = sign(small, key, b"hello")
    assert verify_sig(small, key.public, b"hello", sig)
    assert not verify_sig(small, key.public, b"hellx", sig)
    other = gen_signing_key(small, rng)
    assert not verify_sig(small, other.public, b"hello", sig)


def test_establish_pair_antisymmetry(small):
    rng = random.Random(1)
    ki, kj = gen_signing_key(small, rng), gen_signing_key(small, rng)
    secret, signed_i, signed_j = establish_pair(small, 0, 1, rng, 3, ki, kj)
    for slot, s in enumerate(secret.rounds):
        c_ij = commit(small, s.key, s.blind)
        c_ji = commit(small, -s.key % 53, -s.blind % 53)
        assert c_ij * c_ji % small.p == 1
        assert signed_i[slot].commitment == c_ij
        assert signed_j[slot].commitment == c_ji
        # each endorsement verifies under the counterparty key
        assert verify_sig(
            small, kj.public, commitment_payload(small, c_ij, 0, 1, slot), signed_i[slot].signature
        )
        assert verify_sig(
            small, ki.public, commitment_payload(small, c_ji, 1, 0, slot), signed_j[slot].signature
        )


def test_establish_pair_refusal(small):
    rng = random.Random(2)
    ki, kj = gen_signing_key(small, rng), gen_signing_key(small, rng)
    with pytest.raises(SignatureRefused):
        establish_pair(small, 0, 1, rng, 2, ki, kj, refusers={1})


def test_per_round_secrets_are_fresh(small):
    # two scheduled rounds draw independently: over many edges the
    # per-round keys must not be systematically equal
    rng = random.Random(3)
    ki, kj = gen_signing_key(small, rng), gen_signing_key(small, rng)
    repeats = 0
    for _ in range(120):
        secret, _, _ = establish_pair(small, 0, 1, rng, 2, ki, kj)
        if secret.rounds[0].key == secret.rounds[1].key:
            repeats += 1
    assert repeats < 20  # expectation is about 120/53


def test_key_graph_structure_and_views(small):
    rng = random.Random(4)
    graph = build_key_graph(small, range(4), 3, rng)
    assert len(graph.edges) == 6
    # directed secrets are negations of each other
    for slot in range(3):
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                a = graph.round_secret(i, j, slot)
                b = graph.round_secret(j, i, slot)
                assert (a.key + b.key) % 53 == 0
                assert (a.blind + b.blind) % 53 == 0
    # pad sums cancel across all participants
    for slot in range(3):
        total = sum(graph.view(i).pad_sum(slot) for i in range(4)) % 53
        assert total == 0


def test_aggregate_commitments_cancel(small):
    rng = random.Random(5)
    graph = build_key_graph(small, range(5), 2, rng)
    for slot in range(2):
        product = 1
        for pid in range(5):
            product = product * aggregate_commitment(graph, pid, slot) % small.p
        assert product == 1
        # view agrees with graph-level aggregation
        for pid in range(5):
            assert graph.view(pid).aggregate_commitment(slot) == aggregate_commitment(
                graph, pid, slot
            )


def test_optout_edges_contribute_identity(small):
    rng = random.Random(6)
    graph = build_key_graph(small, range(4), 2, rng, refusers={2})
    for peer in (0, 1, 3):
        state = graph.edge(2, peer)
        assert not state.established
        s = graph.round_secret(2, peer, 0)
        assert (s.key, s.blind) == (0, 0)
    # a full refuser has the identity aggregate
    assert aggregate_commitment(graph, 2, 0) == 1
    # validity still holds for everyone
    product = 1
    for pid in range(4):
        product = product * aggregate_commitment(graph, pid, 0) % small.p
    assert product == 1


def test_all_edges_opted_out(small):
    rng = random.Random(7)
    graph = build_key_graph(small, range(3), 1, rng, refusers={0, 1, 2})
    for pid in range(3):
        assert aggregate_commitment(graph, pid, 0) == 1
        assert graph.view(pid).pad_sum(0) == 0


def test_view_slot_ledger(small):
    rng = random.Random(8)
    graph = build_key_graph(small, range(3), 2, rng)
    view = graph.view(0)
    assert view.spend("round-a") == 0
    assert view.spend("round-b") == 1
    with pytest.raises(RoundBudgetExhausted):
        view.spend("round-c")
    with pytest.raises(RoundBudgetExhausted):
        view.spend("round-a")  # single-use per round
    assert view.slot_of("round-a") == 0


def test_public_header_shape(small):
    rng = random.Random(9)
    graph = build_key_graph(small, range(3), 2, rng, refusers={1})
    public = graph.public()
    assert public.n == 3
    assert sorted(public.publics) == [0, 1, 2]
    states = {(e.lo, e.hi): e.established for e in public.edges}
    assert states == {(0, 1): False, (0, 2): True, (1, 2): False}
    assert public.optout_pairs() == {(0, 1), (1, 2)}


def test_merkle_batch_single_leaf(small):
    rng = random.Random(10)
    key = gen_signing_key(small, rng)
    batch = merkle_batch_sign(small, key, [36])
    assert batch.paths == ((),)
    assert verify_leaf(small, key.public, batch, 36, 0)


def test_merkle_batch_inclusion_paths(small):
    rng = random.Random(11)
    key = gen_signing_key(small, rng)
    commitments = [commit(small, k, k + 1) for k in range(7)]
    batch = merkle_batch_sign(small, key, commitments)
    for index, c in enumerate(commitments):
        assert verify_leaf(small, key.public, batch, c, index)
    # four-leaf case: every path has exactly two nodes
    batch4 = merkle_batch_sign(small, key, commitments[:4])
    assert all(len(path) == 2 for path in batch4.paths)
    assert verify_leaf(small, key.public, batch4, commitments[2], 2)


def test_merkle_batch_rejects_tampering(small):
    rng = random.Random(12)
    key = gen_signing_key(small, rng)
    commitments = [commit(small, k, 2 * k) for k in range(4)]
    batch = merkle_batch_sign(small, key, commitments)
    # wrong leaf value
    assert not verify_leaf(small, key.public, batch, commitments[1], 2)
    # flipped path node
    sibling, side = batch.paths[2][0]
    flipped = bytes([sibling[0] ^ 1]) + sibling[1:]
    tampered = batch.paths[2][:0] + ((flipped, side),) + batch.paths[2][1:]
    from dataclasses import replace

    bad = replace(batch, paths=batch.paths[:2] + (tampered,) + batch.paths[3:])
    assert not verify_leaf(small, key.public, bad, commitments[2], 2)
    # wrong signer
    other = gen_signing_key(small, rng)
    assert not verify_leaf(small, other.public, batch, commitments[2], 2)
    with pytest.raises(PathInvalid):
        verify_leaf(small, key.public, batch, commitments[0], 9)
    garbled = replace(batch, paths=((("zzz", True, 1),),) + batch.paths[1:])
    with pytest.raises(PathInvalid):
        verify_leaf(small, key.public, garbled, commitments[0], 0)


def test_setup_determinism(small):
    a = build_key_graph(small, range(4), 2, random.Random(99))
    b = build_key_graph(small, range(4), 2, random.Random(99))
    for pair in a.edges:
        ea, eb = a.edges[pair], b.edges[pair]
        assert ea.secret == eb.secret
        assert ea.signed_lo == eb.signed_lo
