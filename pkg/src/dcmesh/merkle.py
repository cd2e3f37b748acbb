"""Merkle tree with inclusion paths, used to batch-endorse commitment lists."""

from __future__ import annotations

import hashlib

_LEAF = b"\x00"
_NODE = b"\x01"


def leaf_hash(data: bytes) -> bytes:
    return hashlib.sha256(_LEAF + data).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(_NODE + left + right).digest()


def build_tree(leaves: list[bytes]):
    """Return (root, paths).  paths[i] is a list of (sibling, sibling_is_left).

    Odd nodes are promoted to the next level unpaired, so paths can
    have differing lengths.  A single leaf is its own root with an
    empty path.
    """
    if not leaves:
        raise ValueError("need at least one leaf")
    level = [leaf_hash(x) for x in leaves]
    paths = [[] for _ in leaves]
    positions = list(range(len(leaves)))
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            nxt.append(node_hash(level[i], level[i + 1]))
        promoted = len(level) % 2 == 1
        if promoted:
            nxt.append(level[-1])
        for leaf, pos in enumerate(positions):
            if promoted and pos == len(level) - 1:
                positions[leaf] = len(nxt) - 1
                continue
            sibling = pos ^ 1
            paths[leaf].append((level[sibling], sibling < pos))
            positions[leaf] = pos // 2
        level = nxt
    return level[0], paths


def path_root(leaf: bytes, path) -> bytes:
    acc = leaf_hash(leaf)
    for sibling, sibling_is_left in path:
        acc = node_hash(sibling, acc) if sibling_is_left else node_hash(acc, sibling)
    return acc


def check_path(root: bytes, leaf: bytes, path) -> bool:
    return path_root(leaf, path) == root
