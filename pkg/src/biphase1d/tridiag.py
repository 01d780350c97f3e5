"""Periodic (cyclic) tridiagonal linear solves.

The implicit viscosity discretization couples each interface velocity to
its two neighbours with periodic wrap-around, giving a tridiagonal matrix
with two extra corner entries.  The corners are removed with a rank-one
correction, leaving two ordinary tridiagonal solves that share one banded
factorization.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.linalg import LinAlgError

from .errors import SingularSystemError

_PIVOT_FLOOR = 1e-300


@dataclass
class CyclicTridiagonalSystem:
    """A x = rhs with A[j, j-1 mod n] = sub[j], A[j, j] = diag[j],
    A[j, j+1 mod n] = sup[j]."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.sub = np.asarray(self.sub, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.sup = np.asarray(self.sup, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = self.diag.size
        if n < 3:
            raise ValueError(f"cyclic system needs n >= 3, got n = {n}")
        for name in ("sub", "sup", "rhs"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")

    @property
    def n(self):
        return self.diag.size

    def matvec(self, x):
        """A @ x with periodic wrap."""
        x = np.asarray(x, dtype=float)
        return self.diag * x + self.sub * np.roll(x, 1) + self.sup * np.roll(x, -1)


def _locate_bad_pivot(diag, sub, sup):
    """Thomas elimination on the corner-free part, reporting the first
    pivot below the singularity floor (None if all pivots are fine)."""
    n = diag.size
    piv = diag[0]
    if abs(piv) < _PIVOT_FLOOR:
        return 0
    for j in range(1, n):
        piv = diag[j] - sub[j] * (sup[j - 1] / piv)
        if abs(piv) < _PIVOT_FLOOR:
            return j
    return None


def solve_cyclic_tridiagonal(system):
    """Solve the periodic tridiagonal system, O(n).

    Uses the standard corner correction: write A = T + u v^T with T
    tridiagonal, solve T y = rhs and T z = u with one factorization, and
    combine x = y - z (v.y)/(1 + v.z).  Exact (to rounding) for the
    diagonally dominant matrices the momentum step produces.
    """
    sub, diag, sup, rhs = system.sub, system.diag, system.sup, system.rhs
    n = system.n

    gamma = -diag[0] if diag[0] != 0.0 else 1.0
    t_diag = diag.copy()
    t_diag[0] -= gamma
    t_diag[-1] -= sub[0] * (sup[-1] / gamma)

    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = t_diag
    ab[2, :-1] = sub[1:]

    b = np.zeros((n, 2))
    b[:, 0] = rhs
    b[0, 1] = gamma
    b[-1, 1] = sup[-1]

    try:
        yz = solve_banded((1, 1), ab, b, check_finite=False)
    except LinAlgError as exc:
        idx = _locate_bad_pivot(t_diag, sub, sup)
        raise SingularSystemError(
            f"singular cyclic tridiagonal system (pivot at row {idx})", index=idx
        ) from exc
    y, z = yz[:, 0], yz[:, 1]

    vy = y[0] + (sub[0] / gamma) * y[-1]
    vz = 1.0 + z[0] + (sub[0] / gamma) * z[-1]
    if not np.isfinite(vz) or abs(vz) < _PIVOT_FLOOR:
        raise SingularSystemError("singular cyclic tridiagonal system "
                                  "(corner correction degenerate)", index=n - 1)
    x = y - (vy / vz) * z
    if not np.all(np.isfinite(x)):
        idx = _locate_bad_pivot(t_diag, sub, sup)
        raise SingularSystemError(
            f"singular cyclic tridiagonal system (pivot at row {idx})", index=idx
        )
    return x
