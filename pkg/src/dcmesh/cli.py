"""Command-line front door.

Subcommands:
  run            execute a scenario file, write its transcript
  verify         replay a transcript and report divergences
  paper-example  run the built-in five-message worked example
  keygen         print a key-graph header for inspection

Exit codes are a stable contract: 0 clean, 1 usage or configuration
error, 2 protocol finding (disruptors detected, or divergence found).
"""

from __future__ import annotations

import argparse
import sys

from . import sim
from .errors import ConfigInvalid, DcMeshError, MalformedRecord
from .groups import derive_params
from .keysetup import build_key_graph
from .transcript import Transcript, record_to_line

_GROUP_CHOICES = {
    "test": "test_medium",
    "test_small": "test_small",
    "test_medium": "test_medium",
    "production": "production",
}


def _apply_overrides(scenario, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.group is not None:
        changes["group"] = _GROUP_CHOICES[args.group]
    if changes:
        from dataclasses import replace

        scenario = replace(scenario, **changes)
        scenario.validate()
    return scenario


def cmd_run(args) -> int:
    try:
        with open(args.scenario) as fh:
            scenario = sim.Scenario.from_text(fh.read())
        scenario = _apply_overrides(scenario, args)
    except (OSError, ConfigInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    transcript = sim.run_scenario(scenario)
    out = args.out or (args.scenario + ".transcript")
    with open(out, "w") as fh:
        fh.write(transcript.to_text())
    if args.verbose:
        for rec in transcript.records:
            if rec["type"] == "ROUND":
                print(f"session {rec['session']} round {rec['id']}")
            elif rec["type"] == "NODE":
                print(
                    f"  node {rec['id']} [{rec['kind']}] ({rec['count']},{rec['total']})"
                    f" {rec['status']}"
                )
            elif rec["type"] == "RESOLVED":
                print(f"  delivered message {rec['payload']}")
    summary = transcript.records[-1]
    print(f"{summary['delivered']} messages / {summary['transmitted']} transmitted rounds")
    print(
        f"proofs verified: {summary['proofs_checked'] - summary['proofs_failed']}"
        f" / failed: {summary['proofs_failed']}"
    )
    verdicts = [r for r in transcript.records if r["type"] == "VERDICT"]
    for v in verdicts:
        print(f"verdict: participant {v['part']} ({v['reason']} at {v['where']})")
    print(f"transcript written to {out}")
    return 2 if verdicts else 0


def cmd_verify(args) -> int:
    try:
        with open(args.transcript) as fh:
            transcript = Transcript.from_text(fh.read())
        report = sim.verify_transcript(transcript)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MalformedRecord as exc:
        print(f"malformed transcript: {exc}", file=sys.stderr)
        return 1
    if report.clean:
        print("transcript verified: clean")
        return 0
    index, message = report.divergences[0]
    print(f"divergence at record {index}: {message}")
    print(f"{len(report.divergences)} divergence(s) total")
    return 2


def cmd_paper_example(args) -> int:
    scenario = sim.REFERENCE_SCENARIO
    if args.seed is not None or args.group is not None:
        scenario = _apply_overrides(scenario, args)
    outcome = sim.single_session(
        scenario.senders,
        seed=scenario.seed,
        n=scenario.n,
        group=scenario.group,
        payload_bits=scenario.payload_bits,
    )
    tree = outcome.tree
    print("collision resolution tree (count,total) with thresholds:")
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        if node.count is None:
            continue
        marker = f"  < {node.threshold}" if node.threshold is not None else ""
        print(f"  round {node_id:>2} [{node.kind}] ({node.count},{node.total}){marker}")
    print(f"transmitted rounds: {tree.transmitted_order}")
    print(f"resolution order:   {[payload for _, payload in tree.resolved]}")

    ok = (
        {nid: (n.count, n.total) for nid, n in tree.nodes.items() if n.count is not None}
        == sim.REFERENCE_NODES
        and {nid: n.threshold for nid, n in tree.nodes.items() if n.threshold is not None}
        == sim.REFERENCE_THRESHOLDS
        and tree.transmitted_order == sim.REFERENCE_TRANSMITTED
        and [payload for _, payload in tree.resolved] == sim.REFERENCE_RESOLUTION
        and not outcome.verdicts
    )
    print("PASS" if ok else "FAIL")
    return 0 if ok else 2


def cmd_keygen(args) -> int:
    try:
        group = _GROUP_CHOICES[args.group or "test"]
        params = derive_params(group, sim.DOMAIN_TAG)
        graph = build_key_graph(
            params, range(args.n), args.rounds, sim.fork_rng(args.seed or 0, "keys", 1)
        )
    except (ValueError, ConfigInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"GROUP {params.to_text()}")
    for rec in sim._key_records(params, 1, graph.public()):
        print(record_to_line(rec))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dcmesh", description="verifiable dining-cryptographers engine"
    )
    parser.add_argument("--verbose", action="store_true", help="per-round progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", help="transcript output path")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.add_argument("--group", choices=sorted(_GROUP_CHOICES))
    p_run.add_argument("--verbose", action="store_true", help="per-round progress output")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="verify a transcript file")
    p_verify.add_argument("transcript")
    p_verify.set_defaults(func=cmd_verify)

    p_ex = sub.add_parser("paper-example", help="run the built-in worked example")
    p_ex.add_argument("--seed", type=int, help="override the example seed")
    p_ex.add_argument("--group", choices=sorted(_GROUP_CHOICES))
    p_ex.set_defaults(func=cmd_paper_example)

    p_keys = sub.add_parser("keygen", help="emit a key-graph header")
    p_keys.add_argument("--n", type=int, default=5)
    p_keys.add_argument("--rounds", type=int, default=4)
    p_keys.add_argument("--seed", type=int, default=0)
    p_keys.add_argument("--group", choices=sorted(_GROUP_CHOICES))
    p_keys.set_defaults(func=cmd_keygen)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DcMeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
