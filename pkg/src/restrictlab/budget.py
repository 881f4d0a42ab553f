"""Desk-scale memory guard.

Enumeration grids, residue grids and histogram convolutions refuse to
materialize more than ``budget`` entries.  The default of 2**28 can be
overridden per call or globally through the environment variable
``RESTRICTLAB_BUDGET``.
"""

from __future__ import annotations

import os

DEFAULT_BUDGET = 2**28


class BudgetExceededError(RuntimeError):
    """Raised when a requested computation would exceed the entry budget."""


def budget_limit(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("RESTRICTLAB_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


def check_budget(n_entries: int, what: str, override: int | None = None) -> None:
    limit = budget_limit(override)
    if n_entries > limit:
        raise BudgetExceededError(
            f"{what} needs {n_entries} entries, over the budget of {limit} "
            f"(raise RESTRICTLAB_BUDGET or pass a larger budget)"
        )
