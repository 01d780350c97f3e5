"""Shared test oracles."""

import numpy as np


def dense_solve(sub, diag, sup, rhs):
    """Independent oracle for periodic tridiagonal systems: assemble the
    full matrix and run Gaussian elimination with partial pivoting."""
    n = len(diag)
    A = np.zeros((n, n))
    for j in range(n):
        A[j, j] = diag[j]
        A[j, (j - 1) % n] = sub[j]
        A[j, (j + 1) % n] = sup[j]
    M = np.hstack([A, np.asarray(rhs, dtype=float).reshape(-1, 1)])
    for col in range(n):
        piv = col + np.argmax(np.abs(M[col:, col]))
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
        M[col] /= M[col, col]
        for row in range(n):
            if row != col and M[row, col] != 0.0:
                M[row] -= M[row, col] * M[col]
    return M[:, -1]


def random_dominant_system(rng, n):
    """A strictly diagonally dominant cyclic tridiagonal system."""
    from biphase1d.tridiag import CyclicTridiagonalSystem

    sub = rng.uniform(-1, 1, n)
    sup = rng.uniform(-1, 1, n)
    margin = rng.uniform(0.1, 2.0, n)
    sign = rng.choice([-1.0, 1.0], n)
    diag = sign * (np.abs(sub) + np.abs(sup) + margin)
    rhs = rng.uniform(-5, 5, n)
    return CyclicTridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs)
