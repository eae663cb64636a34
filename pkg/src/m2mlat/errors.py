"""Exception and warning types shared across the toolkit."""

from __future__ import annotations


class M2MLatError(Exception):
    """Base class for all toolkit errors."""


class UnparseableLine(M2MLatError):
    """A log line does not match the declared format."""

    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        msg = f"line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class NonMonotonicSeq(M2MLatError):
    """A sequence number is not strictly increasing within one node's log."""

    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        msg = f"line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class NonMonotonicTime(M2MLatError):
    """A wall-clock timestamp decreases within one node's log."""

    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        msg = f"line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class EmptyLog(M2MLatError):
    """An operation received a log with no usable records."""


class LengthMismatch(M2MLatError):
    """Two logs could not be paired within the unmatched-fraction tolerance."""


class RoleMismatch(M2MLatError):
    """An event came from a node with the wrong role for the operation."""


class ConfigInvalid(M2MLatError):
    """A configuration value violates its declared invariant."""


class NegativeRtt(M2MLatError):
    """A probe exchange produced a negative round-trip time (clock misbehavior)."""


class MalformedPacket(M2MLatError):
    """A probe datagram failed magic, version, or length checks."""


class ZeroRate(M2MLatError):
    """Calibration error is undefined for a non-positive steering rate."""


class NegativeComponent(M2MLatError):
    """Error-budget components must be non-negative."""


class Unfittable(M2MLatError):
    """No distribution of the requested kind matches the target quantiles."""


class UnknownPreset(M2MLatError):
    """The requested scenario or synchronization preset does not exist."""


class EmptySample(M2MLatError):
    """Summary statistics require at least one sample."""


class TooFewSamples(M2MLatError):
    """Box-plot reduction requires at least five samples."""


class OverlappingTrials(UserWarning):
    """A drawn trial delay exceeds the configured trial interval."""
