"""Exception hierarchy shared by all spanrate modules."""


class SpanrateError(Exception):
    """Base class for all errors raised by spanrate."""


class InvalidInputError(SpanrateError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class InfeasibleRatingError(SpanrateError):
    """No non-negative current keeps the conductor at or below its limit."""


class OutOfModelRangeError(SpanrateError):
    """A solver could not bracket a root inside the modelled range."""


class DegenerateDistributionError(SpanrateError):
    """Too few usable samples to fit a distribution."""


class InputValidationError(SpanrateError):
    """A data file failed validation.

    ``problems`` holds ``(path, line_number, message)`` tuples so callers can
    print file/line diagnostics.
    """

    def __init__(self, message, problems=()):
        super().__init__(message)
        self.problems = list(problems)

    def __str__(self):
        head = super().__str__()
        if not self.problems:
            return head
        lines = [head]
        for path, lineno, msg in self.problems[:50]:
            where = f"{path}:{lineno}" if lineno is not None else str(path)
            lines.append(f"  {where}: {msg}")
        if len(self.problems) > 50:
            lines.append(f"  ... {len(self.problems) - 50} more")
        return "\n".join(lines)
