"""Global time/size guards for potentially expensive searches.

The environment variable TSL_BUDGET_MS, when set, caps the wall-clock time of
a command; long-running loops call :func:`checkpoint` and abort with
:class:`BudgetExceededError` once the deadline passes.  Size guards (support
budgets, enumeration caps) raise the same error so callers can report a run
as *inconclusive* rather than failed.
"""

from __future__ import annotations

import os
import time


class BudgetExceededError(RuntimeError):
    """A configured time or size budget was exhausted."""


_deadline: float | None = None


def start_from_env() -> None:
    """Arm the global deadline from TSL_BUDGET_MS (no-op if unset)."""
    global _deadline
    ms = os.environ.get("TSL_BUDGET_MS")
    if ms:
        _deadline = time.monotonic() + int(ms) / 1000.0
    else:
        _deadline = None


def clear() -> None:
    global _deadline
    _deadline = None


def checkpoint() -> None:
    """Raise if the armed deadline has passed.  Cheap; safe in hot loops."""
    if _deadline is not None and time.monotonic() > _deadline:
        raise BudgetExceededError("TSL_BUDGET_MS time budget exhausted")
