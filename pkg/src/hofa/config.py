"""Runtime knobs shared by the numeric modules."""
import os

DEFAULT_BUDGET = 10**7
DEFAULT_TOL = 1e-9


def term_budget() -> int:
    """Maximum number of summation terms for brute-force evaluations.

    Overridden by the ``HOFA_BUDGET`` environment variable.
    """
    raw = os.environ.get("HOFA_BUDGET")
    if raw:
        try:
            return int(float(raw))
        except ValueError:
            pass
    return DEFAULT_BUDGET
