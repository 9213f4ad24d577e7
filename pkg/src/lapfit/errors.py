"""Exception types raised across the package."""


class LapfitError(ValueError):
    """Base class for all computation errors raised by lapfit."""


class NotPositiveDefinite(LapfitError):
    """``L + 11^T/n`` (or a GGL matrix) failed the Cholesky pivot check."""


class NotConnected(LapfitError):
    pass


class NotAcyclic(LapfitError):
    pass


class DegenerateEdge(LapfitError):
    """An edge would receive an infinite closed-form weight (zero difference, alpha = 0)."""


class DegenerateLoop(LapfitError):
    pass


class NoPositiveSpanningTree(LapfitError):
    """Edges with positive optimal weight do not span the vertex set."""


class ImageTooSmall(LapfitError):
    pass


class DimensionMismatch(LapfitError):
    pass


class MalformedHeader(LapfitError):
    pass


class TruncatedData(LapfitError):
    pass
