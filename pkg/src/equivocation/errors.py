"""Exception and warning types raised across the package."""


class EquivocationError(ValueError):
    """Base class for all validation and domain errors."""


class NegativeEntry(EquivocationError):
    pass


class EmptyMatrix(EquivocationError):
    pass


class MassNotOne(EquivocationError):
    pass


class SizeOverflow(EquivocationError):
    pass


class DomainError(EquivocationError):
    pass


class ZeroAtom(EquivocationError):
    pass


class IntervalError(EquivocationError):
    pass


class CaseMismatch(EquivocationError):
    pass


class UncertifiedFamily(EquivocationError):
    pass


class HypothesisWarning(UserWarning):
    """A rate lies outside the region where an asymptotic formula is proven."""


class GrowthCapWarning(UserWarning):
    """An optimisation hit its parameter cap while the objective was still growing."""
