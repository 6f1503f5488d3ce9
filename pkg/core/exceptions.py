class SpanrayError(Exception):
    """Base class for every error raised by the library."""


class ConfigurationError(SpanrayError, ValueError):
    pass


class GraphError(SpanrayError):
    pass


class SamplingError(SpanrayError):
    pass


class TilingError(SpanrayError):
    pass


class AssemblyError(SpanrayError):
    pass


class SearchExhaustedError(SpanrayError):
    pass


class InvarianceError(SpanrayError):
    pass
