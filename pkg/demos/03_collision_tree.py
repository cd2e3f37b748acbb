"""The five-message collision resolution tree, round by round.

Five senders transmit in the same round; the collision is split by
retransmitting the below-average payloads while the other half of
every split is inferred by subtraction, so five messages cost exactly
five transmitted rounds.
"""

from dcmesh import sim

senders = sim.REFERENCE_SCENARIO.senders
print("senders:", ", ".join(f"P{pid} -> {payload}" for pid, payload in senders))

out = sim.single_session(senders, seed=7, n=5)
tree = out.tree

print("\nnode-by-node (count, payload total):")
for node_id in sorted(tree.nodes):
    node = tree.nodes[node_id]
    if node.count is None:
        continue
    extra = ""
    if node.threshold is not None:
        extra = f"  split at < {node.threshold}"
    if node.status == "resolved":
        extra = f"  resolved message {node.total}"
    print(f"  round {node_id:>2} [{node.kind:>11}] ({node.count},{node.total}){extra}")

print(f"\ntransmitted rounds: {tree.transmitted_order}")
print(f"inferred rounds:    {[i for i in sorted(tree.nodes) if tree.nodes[i].kind == 'inferred' and tree.nodes[i].count is not None]}")
print(f"resolution order:   {[payload for _, payload in tree.resolved]}")
print(f"messages delivered: {len(tree.resolved)}   rounds transmitted: {len(tree.transmitted_order)}")
print(f"retransmission proofs checked: {out.proofs_checked}, failed: {out.proofs_failed}")
