"""Exception hierarchy shared across the simulator and fleet service."""


class ReefSeedError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(ReefSeedError):
    """An argument violates an operation's precondition."""


class OutOfBoundsError(ReefSeedError):
    """A world position falls outside the map; callers treat this as a
    mission-boundary violation."""


class InvalidStateError(ReefSeedError):
    """An operation was requested in a state that forbids it (e.g. payload
    reconfiguration while the vehicle is moving)."""


class ConfigurationError(ReefSeedError):
    """A scenario or model configuration is unknown or inconsistent."""


class FleetCapacityError(ReefSeedError):
    """Registration would exceed the seven-vehicle fleet limit."""


class DispatchError(ReefSeedError):
    """A formation dispatch cannot be satisfied by the active fleet."""


class CodecError(ReefSeedError):
    """Base class for wire-protocol encode/decode failures."""


class EncodingError(CodecError):
    """A message cannot be encoded (e.g. oversize payload)."""


class DecodeError(CodecError):
    """A byte frame is not a valid encoding of any message."""


class EmptyLogError(ReefSeedError):
    """A metrics computation was requested on an empty event log."""


class DataIntegrityError(ReefSeedError):
    """An event log record is missing required fields (e.g. ground truth)."""
