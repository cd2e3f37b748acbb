"""Exception types shared across the package."""


class DcMeshError(Exception):
    """Base class for all protocol errors."""


class GroupTooLarge(DcMeshError):
    """Exhaustive search requested on a group above the desk-scale guard."""


class DlogNotFound(DcMeshError):
    """Target is not a power of the given base."""


class TooManyValues(DcMeshError):
    """Vector commitment received more values than message generators."""


class WitnessMismatch(DcMeshError):
    """Prover witness does not satisfy the statement; refusing to emit a proof."""


class EmptyClauseList(DcMeshError):
    """Conjunction proof requested over zero clauses."""


class SignatureRefused(DcMeshError):
    """A participant declined to endorse a pairwise commitment."""

    def __init__(self, participant):
        super().__init__(f"participant {participant} refused to sign")
        self.participant = participant


class PathInvalid(DcMeshError):
    """Merkle inclusion path does not reproduce the signed root."""


class RoundBudgetExhausted(DcMeshError):
    """No unspent per-round secrets remain for this participant."""


class MissingParticipant(DcMeshError):
    """A round is missing a ciphertext from an expected participant."""


class DuplicateParticipant(DcMeshError):
    """A round contains two ciphertexts from the same participant."""


class PayloadOverflow(DcMeshError):
    """Payload does not fit in the configured slot width."""


class NotACollision(DcMeshError):
    """Slot arithmetic requested on a slot holding fewer than two messages."""


class ProtocolOrderViolation(DcMeshError):
    """A ciphertext arrived for a round that is not next on the schedule."""


class ConfigInvalid(DcMeshError):
    """Scenario configuration violates its invariants."""


class MalformedRecord(DcMeshError):
    """A transcript line cannot be parsed."""

    def __init__(self, index, message):
        super().__init__(f"record {index}: {message}")
        self.index = index
