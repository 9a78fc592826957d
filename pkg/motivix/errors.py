"""Exception hierarchy shared by the engine, the CLI and the HTTP front end."""


class MotivixError(Exception):
    exit_code = 1


class RankError(MotivixError):
    """A generating set does not span a full-rank lattice."""


class ShapeError(MotivixError):
    """Dimensions of two operands do not match."""


class LatticeError(MotivixError):
    """Glue data cannot be turned into a lattice containing the order."""


class UnsupportedQuery(MotivixError):
    """The axiomatic integrality oracle cannot decide the query."""


class PreconditionError(MotivixError):
    pass


class HypothesisError(PreconditionError):
    """Some proper abelian subvariety has exponent below the required bound."""

    exit_code = 3


class CandidateError(MotivixError):
    pass


class InvalidInput(MotivixError):
    pass


class ReductionError(MotivixError):
    """A differential form does not reduce to the canonical f*omega shape."""


class OracleError(MotivixError):
    """The finite-field degree oracle found no stable answer."""
