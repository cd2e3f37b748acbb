"""Group arithmetic and Pedersen commitments against brute-force oracles.

Expected values marked as frozen were computed with the independent
modular-exponentiation oracle below (plain pow on the fixed test
group), not with the code under test.
"""

import random

import pytest

from dcmesh.errors import DlogNotFound, GroupTooLarge, TooManyValues
from dcmesh.groups import (
    GroupParams,
    brute_force_dlog,
    combine,
    commit,
    commit_vector,
    derive_params,
    negate,
    verify_open,
)

TAG = b"dc-mesh/v1"


def oracle_commit(p, g, h, k, r):
    # independent check: direct exponentiation, no library calls
    return pow(g, k, p) * pow(h, r, p) % p


def test_test_small_fixed_parameters(small):
    assert (small.p, small.q, small.g, small.h) == (107, 53, 4, 9)
    small.validate()


def test_derivation_is_deterministic_per_tag():
    a = derive_params("production", b"dc-mesh/v1")
    b = derive_params("production", b"dc-mesh/v1")
    c = derive_params("production", b"other-tag")
    assert a.generators == b.generators
    assert a.generators != c.generators


@pytest.mark.parametrize("level", ["test_small", "test_medium", "production"])
def test_generators_lie_in_the_subgroup(level):
    params = derive_params(level, TAG, extra_generators=1)
    for x in params.generators:
        assert x != 1
        assert pow(x, params.q, params.p) == 1
    assert len(set(params.generators)) == len(params.generators)


def test_empty_domain_tag_rejected():
    with pytest.raises(ValueError):
        derive_params("test_small", b"")


def test_many_extra_generators_stay_distinct():
    # the tiny group has only 52 non-identity elements, so collisions in
    # the derivation are likely and must be retried away
    for tag in (b"a", b"b", b"dc-mesh/v1"):
        params = derive_params("test_small", tag, extra_generators=6)
        assert len(set(params.generators)) == 8
        for x in params.generators:
            assert pow(x, params.q, params.p) == 1 and x != 1


def test_commit_golden_value(small):
    # frozen: 4^5 * 9^7 mod 107 = 36
    assert commit(small, 5, 7) == 36
    assert commit(small, 5, 7) == oracle_commit(107, 4, 9, 5, 7)


def test_commit_identity_and_cancellation(small):
    assert commit(small, 0, 0) == 1
    c = commit(small, 5, 7)
    assert combine(small, c, commit(small, -5 % 53, -7 % 53)) == 1


def test_verify_open_roundtrip_and_rejection(small):
    c = commit(small, 5, 7)
    assert verify_open(small, c, 5, 7)
    # frozen: 4^6 * 9^7 mod 107 = 37 != 36
    assert oracle_commit(107, 4, 9, 6, 7) == 37
    assert not verify_open(small, c, 6, 7)
    assert verify_open(small, 1, 0, 0)


def test_combine_negate_basics(small):
    c = commit(small, 12, 33)
    assert combine(small, c, 1) == c
    assert combine(small, c, negate(small, c)) == 1
    # frozen: 5+48 = 53 = 0 and 7+46 = 53 = 0 mod q
    assert combine(small, commit(small, 5, 7), commit(small, 48, 46)) == 1


def test_homomorphism_random_sampling(small):
    rng = random.Random(42)
    for _ in range(300):
        a, b, r, s = (rng.randrange(53) for _ in range(4))
        lhs = combine(small, commit(small, a, r), commit(small, b, s))
        assert lhs == commit(small, (a + b) % 53, (r + s) % 53)


def test_homomorphism_medium_group(medium):
    rng = random.Random(7)
    for _ in range(100):
        a, b, r, s = (rng.randrange(medium.q) for _ in range(4))
        lhs = combine(medium, commit(medium, a, r), commit(medium, b, s))
        assert lhs == commit(medium, (a + b) % medium.q, (r + s) % medium.q)


def test_hiding_enumeration_covers_coset(small):
    # r -> commit(K, r) is a bijection onto the whole order-q subgroup
    for k in (0, 5, 29):
        outputs = {commit(small, k, r) for r in range(53)}
        assert len(outputs) == 53
        subgroup = {pow(small.g, x, small.p) for x in range(53)}
        assert outputs == subgroup


def test_elements_satisfy_subgroup_membership(small):
    rng = random.Random(1)
    for _ in range(50):
        c = commit(small, rng.randrange(53), rng.randrange(53))
        assert small.is_element(c)


def test_commit_vector_degenerates_to_scalar(small):
    ext = derive_params("test_small", TAG, extra_generators=1)
    assert commit_vector(ext, [17], 9) == commit(ext, 17, 9)
    assert commit_vector(ext, [0, 0], 0) == 1


def test_commit_vector_golden_against_oracle():
    ext = derive_params("test_small", TAG, extra_generators=1)
    g, gp, h = ext.generators
    expected = pow(g, 2, 107) * pow(gp, 3, 107) * pow(h, 1, 107) % 107
    assert commit_vector(ext, [2, 3], 1) == expected


def test_commit_vector_too_many_values(small):
    with pytest.raises(TooManyValues):
        commit_vector(small, [1, 2], 3)


def test_commit_vector_homomorphism():
    ext = derive_params("test_small", TAG, extra_generators=1)
    lhs = combine(
        ext, commit_vector(ext, [3, 4], 5), commit_vector(ext, [10, 20], 30)
    )
    assert lhs == commit_vector(ext, [13, 24], 35)


def test_brute_force_dlog_basics(small):
    assert brute_force_dlog(small, small.g, small.g) == 1
    assert brute_force_dlog(small, small.g, 1) == 0
    # frozen: 9^25 mod 107 = 4
    x = brute_force_dlog(small, 9, 4)
    assert x == 25
    assert pow(9, x, 107) == 4


def test_brute_force_dlog_not_found(small):
    # 2 is not a quadratic residue mod 107, hence outside the subgroup
    with pytest.raises(DlogNotFound):
        brute_force_dlog(small, small.g, 2)


def test_brute_force_dlog_guard():
    params = derive_params("production", TAG)
    with pytest.raises(GroupTooLarge):
        brute_force_dlog(params, params.g, params.h)


def test_binding_break_recovers_base_relation(small):
    # a fabricated double opening yields the discrete log between bases
    lam = brute_force_dlog(small, small.h, small.g)
    rng = random.Random(5)
    for _ in range(20):
        a, b = rng.randrange(53), rng.randrange(53)
        delta = rng.randrange(1, 53)
        a2 = (a + delta) % 53
        b2 = (b - lam * delta) % 53
        assert commit(small, a, b) == commit(small, a2, b2)
        recovered = (b2 - b) * pow(a - a2, -1, 53) % 53
        assert recovered == lam


def test_params_text_roundtrip(small):
    text = small.to_text()
    again = GroupParams.from_text(text)
    assert again == small


def test_scalar_element_serialization_widths(medium):
    assert len(medium.element_to_bytes(medium.p - 1)) == medium.element_bytes
    assert len(medium.scalar_to_bytes(medium.q - 1)) == medium.scalar_bytes
