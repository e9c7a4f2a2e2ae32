"""Exception and warning types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """One or more input values violate a documented constraint.

    Carries the full list of violations so callers can report every bad
    field at once instead of fixing them one by one.
    """

    def __init__(self, errors: list[str] | str):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NumericalError(RuntimeError):
    """A simulation could not produce a trustworthy result (grid too
    coarse, state overflow, aliasing in a spectral window)."""


class EstimateWarning(UserWarning):
    """A closed-form estimate was evaluated outside its validity range."""
