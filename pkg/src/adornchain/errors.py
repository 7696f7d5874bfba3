"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid geometric input (degenerate region, bad arc, out-of-range parameter)."""


class PreconditionError(ValueError):
    """An operation's stated precondition was violated by the caller."""


class EngineError(RuntimeError):
    """The motion engine could not make progress (infeasible step subproblem)."""


class SceneFormatError(ValueError):
    """A scene file failed to parse or validate; message names the offending field."""
