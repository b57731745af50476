"""Exception hierarchy shared by all iprlab modules."""


class IPRError(Exception):
    """Base class for every error raised by iprlab."""


class InvalidInput(IPRError, ValueError):
    """Malformed literal, file or argument."""


# numeric core
class NotDyadic(InvalidInput):
    pass


class NotPositive(InvalidInput):
    pass


class EmptySupport(InvalidInput):
    pass


class OutOfRange(InvalidInput):
    pass


# matrices and enumerations
class UnknownFamily(InvalidInput):
    pass


class SizeTooLarge(InvalidInput):
    pass


class AllZero(InvalidInput):
    pass


class MissingBreakpoints(InvalidInput):
    pass


class TupleTooLong(InvalidInput):
    pass


# colorings
class OutOfDomain(InvalidInput):
    pass


class DomainNotClosed(InvalidInput):
    def __init__(self, offending):
        self.offending = list(offending)
        shown = ", ".join(f"({x}, {t})" for x, t in self.offending[:5])
        more = "" if len(self.offending) <= 5 else f" and {len(self.offending) - 5} more"
        super().__init__(f"domain not closed under multiples: {shown}{more}")


# search
class BudgetExhausted(IPRError):
    """The node budget ran out before the search space was exhausted."""

    def __init__(self, nodes):
        self.nodes = nodes
        super().__init__(f"node budget exhausted after {nodes} nodes")


class ImageOutsideDomain(IPRError):
    pass


class MalformedCertificate(InvalidInput):
    pass


# constructions
class GrowthViolation(InvalidInput):
    def __init__(self, index):
        self.index = index
        super().__init__(f"growth premise y_n > 2^n*y_0 fails at n={index}")


class PremiseViolation(InvalidInput):
    def __init__(self, index):
        self.index = index
        super().__init__(f"premise y_(n-1) < 1/(2n-1) fails at n={index}")


class PrefixTooShort(IPRError):
    pass


class PipelineError(IPRError):
    """A stage of the extension pipeline failed."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"stage {stage}: {message}")


class NoZError(PipelineError):
    pass


class BlockUnsolvable(IPRError):
    def __init__(self, block, message="search exhausted within oracle tail"):
        self.block = block
        super().__init__(f"block {block}: {message}")


class OracleExhausted(IPRError):
    def __init__(self, block, message="generators depleted"):
        self.block = block
        super().__init__(f"block {block}: {message}")


class BlockFailure(IPRError):
    def __init__(self, block, report):
        self.block = block
        self.report = report
        super().__init__(f"block {block} failed: {report}")


class DisjointnessViolation(IPRError):
    def __init__(self, member, targets):
        self.member = member
        self.targets = targets
        super().__init__(f"targets not disjoint: member {member} lies in targets {targets}")
