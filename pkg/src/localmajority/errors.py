"""Exception hierarchy shared across the package."""


class LocalMajorityError(Exception):
    """Base class for every error raised by this package."""


class GraphError(LocalMajorityError, ValueError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class VertexRangeError(GraphError, IndexError):
    pass


class EdgeListFormatError(GraphError):
    """Malformed edge-list text."""


class NoEffectiveDegreeError(GraphError):
    """No degree class reaches the configured fraction of vertices."""


class GenerationError(LocalMajorityError):
    pass


class OddDegreeSumError(GenerationError, ValueError):
    pass


class AttemptsExhaustedError(GenerationError):
    pass


class ScopeError(LocalMajorityError, ValueError):
    """An MMP scope whose ball is not a tree."""


class ConfigError(LocalMajorityError, ValueError):
    pass
