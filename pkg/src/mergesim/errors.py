"""Exception types shared across the simulator."""


class InvalidStateError(ValueError):
    """A vehicle state, action, or config failed validation."""


class SimulationIntegrityError(RuntimeError):
    """The simulator produced a physically impossible state.

    Raised when two vehicles occupying the same lane corridor overlap
    after a step. The car-following models are built so this cannot
    happen; seeing it means a bug upstream, so callers that catch it
    should record a diagnostic rather than swallow it silently.
    """


class SchemaError(ValueError):
    """A persisted artifact does not match the expected format version."""
