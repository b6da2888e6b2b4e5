"""Dense complex-Hermitian linear algebra for small matrices.

Everything downstream (density operators, detection operators, dual
witnesses) is a small Hermitian matrix, so this module concentrates the
eigen machinery in one place: a branch-stable closed-form eigensolver for
2x2 matrices, `numpy.linalg.eigh` for larger ones, PSD tests and kernel
extraction with a deterministic eigenvector phase convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute default tolerance for PSD/kernel tests.  All operators handled
# here are trace-bounded by 1, so absolute tolerances are meaningful.
DEFAULT_TOL = 1e-9

_HERMITIAN_TOL = 1e-12


class NoKernelError(ValueError):
    """Requested a kernel vector of a matrix whose spectrum stays away from zero."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with orthonormal column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_hermitian(matrix, tol: float = _HERMITIAN_TOL) -> np.ndarray:
    """Validate Hermiticity and return the exactly symmetrized matrix.

    Raises ValueError with the worst symmetry violation if the input
    deviates from its conjugate transpose by more than `tol` (relative to
    the matrix scale).
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    deviation = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if deviation > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max |A - A^dag| = {deviation:.3e} "
            f"exceeds tolerance {tol * scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the first significant component is real positive."""
    v = np.asarray(vector, dtype=complex)
    peak = float(np.max(np.abs(v)))
    if peak == 0.0:
        return v.copy()
    idx = int(np.flatnonzero(np.abs(v) > 1e-8 * peak)[0])
    phase = v[idx] / abs(v[idx])
    w = v / phase
    w[idx] = abs(w[idx])
    return w


def _eig2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form spectral decomposition of a 2x2 Hermitian matrix."""
    p = a[0, 0].real
    s = a[1, 1].real
    q = a[0, 1]
    mean = 0.5 * (p + s)
    gap = 0.5 * (p - s)
    h = float(np.hypot(gap, abs(q)))
    evals = np.array([mean - h, mean + h])
    if h <= 1e-15 * max(1.0, abs(mean)):
        return evals, np.eye(2, dtype=complex)
    # Eigenvector of the larger eigenvalue; pick the numerically fatter column.
    cand1 = np.array([q, h - gap], dtype=complex)
    cand2 = np.array([h + gap, np.conj(q)], dtype=complex)
    v2 = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
    v2 = v2 / np.linalg.norm(v2)
    v1 = np.array([-np.conj(v2[1]), np.conj(v2[0])])
    vecs = np.column_stack([v1, v2])
    return evals, vecs


def eig_hermitian(matrix) -> EigenDecomposition:
    """Spectral decomposition with ascending eigenvalues and fixed phases."""
    a = as_hermitian(matrix)
    if a.shape[0] == 2:
        evals, evecs = _eig2(a)
    else:
        evals, evecs = np.linalg.eigh(a)
        evecs = np.asarray(evecs, dtype=complex)
    cols = [fix_phase(evecs[:, k]) for k in range(a.shape[0])]
    return EigenDecomposition(np.asarray(evals, dtype=float), np.column_stack(cols))


def min_eigenvalue(matrix) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    a = as_hermitian(matrix)
    if a.shape[0] == 2:
        return float(_eig2(a)[0][0])
    return float(np.linalg.eigvalsh(a)[0])


def is_psd(matrix, tol: float = DEFAULT_TOL) -> bool:
    """True iff the smallest eigenvalue is at least -tol."""
    return min_eigenvalue(matrix) >= -tol


def zero_eigenvector(matrix, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Unit kernel vector of a PSD matrix with a (near-)zero eigenvalue.

    The returned phase is fixed so the first significant component is real
    positive, which makes downstream detection operators reproducible.
    """
    dec = eig_hermitian(matrix)
    smallest = dec.eigenvalues[0]
    if smallest < -tol:
        raise ValueError(
            f"matrix is not PSD within tolerance: min eigenvalue {smallest:.3e}"
        )
    if smallest > tol:
        raise NoKernelError(
            f"no kernel: smallest eigenvalue {smallest:.3e} exceeds tolerance {tol:.1e}"
        )
    return fix_phase(dec.eigenvectors[:, 0])


def projector(vector: np.ndarray) -> np.ndarray:
    """Rank-one projector onto a (normalized copy of a) state vector."""
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def frob_norm(matrix) -> float:
    return float(np.linalg.norm(np.asarray(matrix)))


def vec4(matrix: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a 2x2 Hermitian matrix.

    Frobenius inner products are preserved, which lets completeness
    conditions be solved as ordinary real least-squares problems.
    """
    a = np.asarray(matrix)
    return np.array(
        [
            a[0, 0].real,
            a[1, 1].real,
            np.sqrt(2.0) * a[0, 1].real,
            -np.sqrt(2.0) * a[0, 1].imag,
        ]
    )
