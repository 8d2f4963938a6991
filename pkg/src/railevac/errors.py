"""Exception types raised by the railevac pipeline."""

from __future__ import annotations


class RailEvacError(Exception):
    """Base class for all railevac errors."""


class ValidationError(RailEvacError, ValueError):
    """Bad input data or parameters.

    ``path``, ``line`` and ``column`` locate the problem when it comes from a
    file; any of them may be None.
    """

    def __init__(self, message: str, *, path=None, line: int | None = None,
                 column: str | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        self.column = column
        where = []
        if self.path is not None:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class InfeasiblePrecheck(RailEvacError):
    """Demand cannot be met by the reachable destination capacity.

    ``diagnostics`` maps origin station_id to a dict of ``load``,
    ``candidates`` and ``reachable_capacity``.
    """

    code = "INFEASIBLE_PRECHECK"

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class NumericFailure(RailEvacError):
    code = "NUMERIC_FAILURE"


class MultiOriginUnsupported(RailEvacError, ValueError):
    code = "MULTI_ORIGIN_UNSUPPORTED"


class InstanceTooLarge(RailEvacError, ValueError):
    code = "INSTANCE_TOO_LARGE"


class UnknownFormat(RailEvacError, ValueError):
    code = "UNKNOWN_FORMAT"
