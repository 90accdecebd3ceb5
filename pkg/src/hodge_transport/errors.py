class HodgeTransportError(Exception):
    pass


class InvalidInputError(HodgeTransportError, ValueError):
    pass


class GapFailureError(HodgeTransportError):
    """Kernel cannot be separated from the rest of the spectrum."""

    def __init__(self, message, below=None, above=None):
        super().__init__(message)
        self.below = below
        self.above = above


class InvalidFrameError(HodgeTransportError, ValueError):
    pass


class ContourViolationError(HodgeTransportError):
    pass


class DegenerateSelectionError(HodgeTransportError):
    pass


class RankDeficitError(HodgeTransportError):
    def __init__(self, message, available=0, requested=0):
        super().__init__(message)
        self.available = available
        self.requested = requested


class TransportBreakdownError(HodgeTransportError):
    def __init__(self, message, sigma_min=0.0):
        super().__init__(message)
        self.sigma_min = sigma_min


class ShortDiagramError(HodgeTransportError):
    def __init__(self, message, time_index=None):
        super().__init__(message)
        self.time_index = time_index


class UnsupportedRankError(HodgeTransportError):
    pass
