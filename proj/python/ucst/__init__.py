"""Unidirectional channel systems with tests.

Instances are passed as .ucst / .pep text; see the README for the format.
"""

from ._core import (
    InputError,
    bounded_solve,
    format,
    from_pep,
    gen,
    is_solution,
    reach,
    reduce,
    to_pep,
    validate,
)

__all__ = [
    "InputError",
    "bounded_solve",
    "format",
    "from_pep",
    "gen",
    "is_solution",
    "reach",
    "reduce",
    "to_pep",
    "validate",
]
