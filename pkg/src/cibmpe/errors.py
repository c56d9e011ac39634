"""Exception hierarchy shared by every module of the solver."""

from __future__ import annotations


class CibmpeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CibmpeError, ValueError):
    """Raised when a game or structure violates one of its invariants."""


class NonStochasticRow(ValidationError):
    def __init__(self, kernel: str, stage: int | None, row: tuple, total):
        self.kernel = kernel
        self.stage = stage
        self.row = row
        self.total = total
        where = f"stage {stage}, " if stage is not None else ""
        super().__init__(
            f"{kernel} row is not a probability vector ({where}row {row}): sums to {total}"
        )


class EmptyLabelSet(ValidationError):
    pass


class InvalidHorizon(ValidationError):
    pass


class TimeVaryingCost(ValidationError):
    pass


class LabelError(ValidationError, KeyError):
    """A label is unknown or lies outside the declared label set."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class IncompatibleGame(ValidationError):
    """The requested information structure cannot be built over this game."""

    def __init__(self, message: str, witness: tuple | None = None):
        self.witness = witness
        super().__init__(message if witness is None else f"{message}; witness {witness}")


class OutOfDomain(ValidationError):
    pass


class StageMismatch(ValidationError):
    pass


class ZeroProbabilityIncrement(CibmpeError):
    """Conditioning on an increment that has probability zero."""


class UnreachableIncrement(CibmpeError):
    """No pure prescription pair gives the increment positive probability."""


class MissingContinuationValue(CibmpeError):
    def __init__(self, belief):
        self.belief = belief
        super().__init__(f"no continuation value for successor belief {belief}")


class NoEquilibriumFound(CibmpeError):
    """Support enumeration was exhausted; existence makes this an internal defect."""


class NoPureEquilibrium(CibmpeError):
    """Pure backward induction could not proceed: a stage game has no pure Bayesian equilibrium."""

    def __init__(self, stage: int, belief):
        self.stage = stage
        self.belief = belief
        super().__init__(
            f"stage game at t={stage} has no pure Bayesian Nash equilibrium "
            f"(belief {belief}); use behavioral mode"
        )


class NotATeam(ValidationError):
    def __init__(self, witness: tuple):
        self.witness = witness
        x, u1, u2, c1, c2 = witness
        super().__init__(
            f"cost tensors differ at (x={x}, u1={u1}, u2={u2}): c1={c1}, c2={c2}"
        )


class IndependenceError(CibmpeError):
    """The strategy-independence check did not pass."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"strategy independence check: {report.status}")


class BudgetExceeded(CibmpeError):
    def __init__(self, message: str, frontier: int | None = None):
        self.frontier = frontier
        super().__init__(message)


class SelectionError(CibmpeError):
    pass


class MissingProfileEntry(CibmpeError):
    pass
