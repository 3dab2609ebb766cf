"""Exception types. Every error carries a stable ``code`` (``E0xx``)."""


class MarkovPruneError(Exception):
    code = "E099"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    @property
    def message(self) -> str:
        return self.args[0]


class GraphError(MarkovPruneError):
    code = "E002"


class ParseError(MarkovPruneError):
    """Raised by the model parser; ``diagnostics`` lists every problem found."""

    code = "E005"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0]
        super().__init__(str(first), code=first.code)


class SeparationError(MarkovPruneError):
    code = "E012"


class NotIdentifiable(MarkovPruneError):
    code = "E010"


class ReductionError(MarkovPruneError):
    code = "E011"


class FitError(MarkovPruneError):
    code = "E020"


class SweepError(MarkovPruneError):
    code = "E030"
