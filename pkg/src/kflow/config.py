from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module.

    ``lin`` is relative to the largest singular value (or norm) of the
    quantity being tested.
    """

    jacobi: float = 1e-10
    lin: float = 1e-9
    pd: float = 1e-10
    nil: float = 1e-8
    cert: float = 1e-8
    inconclusive: float = 1e-4
    expanding: float = 1e-8


DEFAULT_TOL = Tolerances()
