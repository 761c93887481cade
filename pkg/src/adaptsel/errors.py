"""Exception hierarchy shared by all modules."""


class AdaptselError(Exception):
    """Base class for all library errors."""


class EmptyVersionSpace(AdaptselError):
    """Conditioning on observations with zero prior mass."""


class MalformedPolicy(AdaptselError):
    """Policy selects an unknown element, repeats an element on a path,
    or is otherwise structurally invalid."""


class BudgetExceedsCost(AdaptselError):
    """Requested sub-policy budget i exceeds the policy's average cost."""


class EnumerationBudgetExceeded(AdaptselError):
    """Exact enumeration would visit more states than the configured budget."""


class CoverageUnreachable(AdaptselError):
    """Some positive-probability realization cannot reach the target value
    even when every element is selected."""


class PreconditionFailed(AdaptselError):
    """A hard precondition of a bound verification is violated."""


class DuplicateHypothesis(AdaptselError):
    """Two hypothesis rows assign identical labels to every example."""


class InvalidParams(AdaptselError):
    """Bad parameters passed to a generator or CLI command."""


class ParseError(AdaptselError):
    """An input file does not conform to the documented JSON format."""
