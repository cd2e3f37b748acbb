"""Canonical, replayable transcript records.

A transcript is newline-delimited ASCII: a header (format version,
group, configuration, participant identities, edge endorsement roots,
and a binding digest) followed by per-session records.  Everything an
independent verifier needs is either in the records or recomputable
from them; secrets never appear except for pair commitments revealed
during an investigation, which are safe to publish.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import MalformedRecord

VERSION = "v1"

# record type -> ordered field names; values are serialized as key=value
_SCHEMA = {
    "DCMESH": ("version", "hash"),
    "GROUP": ("name", "p", "q", "generators", "tag"),
    "CONFIG": ("n", "payload_bits", "max_retries", "scenario"),
    "PUBKEY": ("session", "part", "y"),
    "EDGE": ("session", "lo", "hi", "state", "root_lo", "root_hi"),
    "HEADEREND": ("digest",),
    "SESSION": ("idx", "active", "budget", "keys"),
    "ROUND": ("session", "id", "slot"),
    "CIPHER": ("session", "round", "part", "O", "c", "proof"),
    "AGGREGATE": ("session", "round", "C", "valid"),
    "NODE": (
        "session",
        "id",
        "kind",
        "count",
        "total",
        "status",
        "threshold",
        "probabilistic",
        "attempt",
    ),
    "RESOLVED": ("session", "node", "payload"),
    "PUBLISH": ("session", "slot", "part", "peer", "c", "sig_e", "sig_s"),
    "INVESTIGATION": ("session", "round", "cheaters"),
    "DEMAND": ("session", "node", "part", "ok", "proof"),
    "VERDICT": ("session", "part", "reason", "where"),
    "BAN": ("session", "part"),
    "SUMMARY": (
        "sessions",
        "delivered",
        "transmitted",
        "proofs_checked",
        "proofs_failed",
        "verdicts",
        "bind",
    ),
}

_INT_FIELDS = {
    "p",
    "q",
    "n",
    "payload_bits",
    "max_retries",
    "part",
    "y",
    "lo",
    "hi",
    "idx",
    "budget",
    "session",
    "id",
    "slot",
    "round",
    "O",
    "c",
    "C",
    "valid",
    "count",
    "total",
    "probabilistic",
    "attempt",
    "node",
    "payload",
    "peer",
    "sig_e",
    "sig_s",
    "ok",
    "sessions",
    "delivered",
    "transmitted",
    "proofs_checked",
    "proofs_failed",
    "verdicts",
}


def record(rtype: str, **fields):
    """Build a record dict, checking the type's field set."""
    names = _SCHEMA[rtype]
    if set(fields) != set(names):
        missing = set(names) - set(fields)
        extra = set(fields) - set(names)
        raise ValueError(f"{rtype}: missing={sorted(missing)} extra={sorted(extra)}")
    out = {"type": rtype}
    out.update(fields)
    return out


def record_to_line(rec: dict) -> str:
    rtype = rec["type"]
    parts = [rtype]
    for name in _SCHEMA[rtype]:
        value = rec[name]
        if isinstance(value, bool):
            value = int(value)
        parts.append(f"{name}={value}")
    return " ".join(parts)


def line_to_record(line: str, index: int) -> dict:
    tokens = line.split(" ")
    rtype = tokens[0]
    if rtype not in _SCHEMA:
        raise MalformedRecord(index, f"unknown record type {rtype!r}")
    names = _SCHEMA[rtype]
    if len(tokens) != len(names) + 1:
        raise MalformedRecord(index, f"{rtype} expects {len(names)} fields")
    out = {"type": rtype}
    for name, token in zip(names, tokens[1:]):
        if "=" not in token:
            raise MalformedRecord(index, f"field {token!r} is not key=value")
        key, value = token.split("=", 1)
        if key != name:
            raise MalformedRecord(index, f"expected field {name}, got {key}")
        if name in _INT_FIELDS:
            try:
                value = int(value)
            except ValueError:
                raise MalformedRecord(index, f"field {name} must be an integer") from None
        out[name] = value
    return out


@dataclass
class Transcript:
    header: list = field(default_factory=list)   # records up to HEADEREND
    records: list = field(default_factory=list)  # session records + SUMMARY

    def all_records(self):
        return self.header + self.records

    def to_text(self) -> str:
        return "\n".join(record_to_line(r) for r in self.all_records()) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Transcript":
        lines = [ln for ln in text.split("\n") if ln]
        if not lines:
            raise MalformedRecord(0, "empty transcript")
        records = [line_to_record(ln, i) for i, ln in enumerate(lines)]
        if records[0]["type"] != "DCMESH":
            raise MalformedRecord(0, "transcript must start with a DCMESH line")
        header, body = [], []
        seen_end = False
        for rec in records:
            if not seen_end:
                header.append(rec)
                if rec["type"] == "HEADEREND":
                    seen_end = True
            else:
                body.append(rec)
        if not seen_end:
            raise MalformedRecord(len(records) - 1, "missing HEADEREND record")
        return cls(header=header, records=body)


def header_digest(header_records) -> str:
    """Digest binding every header line before the HEADEREND marker."""
    h = hashlib.sha256()
    for rec in header_records:
        if rec["type"] == "HEADEREND":
            break
        h.update(record_to_line(rec).encode())
        h.update(b"\n")
    return h.hexdigest()


def body_digest(body_records) -> str:
    """Digest binding every session record before the closing summary."""
    h = hashlib.sha256()
    for rec in body_records:
        if rec["type"] == "SUMMARY":
            break
        h.update(record_to_line(rec).encode())
        h.update(b"\n")
    return h.hexdigest()
