"""Exception hierarchy. Every error raised by topokit derives from TopoKitError."""


class TopoKitError(ValueError):
    pass


class DegenerateInput(TopoKitError):
    """Points do not affinely span the ambient space."""


class DegenerateSimplex(TopoKitError):
    pass


class RankDeficient(TopoKitError):
    pass


class NonMonotoneFiltration(TopoKitError):
    pass


class MissingVertexValue(TopoKitError):
    pass


class ComplexTooLarge(TopoKitError):
    pass


class UncappedInfiniteBar(TopoKitError):
    pass


class DiagramTooLarge(TopoKitError):
    pass


class CloudTooSmall(TopoKitError):
    pass


class KTooLarge(TopoKitError):
    pass


class ImageTooSmall(TopoKitError):
    pass


class DimensionMismatch(TopoKitError):
    pass


class NonFiniteLoss(TopoKitError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ParseError(TopoKitError):
    """An input file does not follow its declared format."""
