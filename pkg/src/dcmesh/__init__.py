"""Verifiable dining-cryptographers engine.

Commitment-bound DC-net rounds, zero-knowledge retransmission proofs,
optimal tree collision resolution with disruptor detection, and a
deterministic multi-party simulator with replayable transcripts.
"""

from .groups import GroupParams, brute_force_dlog, commit, commit_vector, derive_params
from .sim import Scenario, run_scenario, verify_transcript
from .splitter import ResolutionTree, resolve
from .transcript import Transcript

__all__ = [
    "GroupParams",
    "ResolutionTree",
    "Scenario",
    "Transcript",
    "brute_force_dlog",
    "commit",
    "commit_vector",
    "derive_params",
    "resolve",
    "run_scenario",
    "verify_transcript",
]
