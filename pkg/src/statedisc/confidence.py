"""Maximum-confidence quantities and the large-Q regime.

For each state, C_j is the best achievable posterior probability that
outcome j is correct given that it occurred: the largest generalized
eigenvalue lambda of det(eta_j rho_j - lambda rho) = 0.  Once the
inconclusive rate passes a threshold Q_u the witness operator degenerates
to a multiple of the average state and the optimum is simply
max_j C_j * (1 - Q); this module computes that branch, builds one witness
measurement for it, and locates Q_u from any solver-supplied value curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .certifier import DualCertificate, Povm, Solution, certify
from .ensemble import Ensemble
from .operators import eig_hermitian, min_eigenvalue

REGIME_LARGE_Q = "LARGE_Q"


@dataclass(frozen=True)
class ConfidenceReport:
    """Per-state maximum confidences and the large-Q rate multiplier."""

    C: tuple[float, ...]
    a_large_Q: float
    maximizer_set: tuple[int, ...]


@dataclass(frozen=True)
class QuRegime:
    """Smallest inconclusive rate at which the relative correct rate saturates."""

    Q_u: float
    attained_by: str


def _check_full_rank(e: Ensemble) -> np.ndarray:
    rho = e.average_matrix()
    dec = eig_hermitian(rho)
    if dec.eigenvalues[0] <= 1e-12:
        bad = dec.eigenvectors[:, 0]
        raise ValueError(
            "average state is singular; deficient direction "
            + np.array2string(bad, precision=6, suppress_small=True)
        )
    return rho


def max_confidence(e: Ensemble) -> ConfidenceReport:
    """Maximum confidence C_j for every state of a full-rank ensemble."""
    rho = _check_full_rank(e)
    cs = []
    for j in range(e.n_states):
        w = e.weighted(j)
        if e.dim == 2:
            # Largest root of det(w - lambda*rho) = 0, a real quadratic.
            det_rho = float(np.linalg.det(rho).real)
            det_w = float(np.linalg.det(w).real)
            mixed = float(
                (
                    w[0, 0] * rho[1, 1]
                    + w[1, 1] * rho[0, 0]
                    - w[0, 1] * rho[1, 0]
                    - w[1, 0] * rho[0, 1]
                ).real
            )
            disc = max(mixed * mixed - 4.0 * det_rho * det_w, 0.0)
            lam = (mixed + np.sqrt(disc)) / (2.0 * det_rho)
        else:
            lam = float(scipy.linalg.eigh(w, rho, eigvals_only=True)[-1])
        cs.append(float(np.clip(lam, 0.0, 1.0)))
    a = max(cs)
    maximizers = tuple(j for j, c in enumerate(cs) if c >= a - 1e-10)
    return ConfidenceReport(tuple(cs), a, maximizers)


def large_Q_value(e: Ensemble, Q: float) -> float:
    """max_j C_j * (1 - Q); equals the optimum only from Q_u upward."""
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q={Q!r} outside [0, 1]")
    return max_confidence(e).a_large_Q * (1.0 - Q)


def _kernel_projector(matrix: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Projector onto the (near-)zero eigenspace of a PSD matrix."""
    dec = eig_hermitian(matrix)
    cols = dec.eigenvectors[:, np.abs(dec.eigenvalues) <= tol]
    if cols.shape[1] == 0:
        return np.zeros_like(matrix)
    return cols @ cols.conj().T


def large_q_solution(e: Ensemble, Q: float, tol: float = 1e-8) -> Solution | None:
    """One witness measurement for the saturated regime, or None below Q_u.

    With Z = a*rho the detection operators are confined to the kernels of
    a*rho - eta_j rho_j for the maximum-confidence states; weights are
    chosen so the inconclusive element stays PSD at the requested Q.  The
    measurement is not unique; a single representative is returned.
    """
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q={Q!r} outside [0, 1]")
    report = max_confidence(e)
    a = report.a_large_Q
    rho = e.average_matrix()
    z = a * rho
    kernels = {j: _kernel_projector(z - e.weighted(j)) for j in report.maximizer_set}
    kernels = {j: k for j, k in kernels.items() if np.trace(k).real > 1e-12}
    if not kernels:
        return None

    weights = {j: float(np.trace(rho @ k).real) for j, k in kernels.items()}

    def _attempt(alloc: dict[int, float]) -> Povm | None:
        pis = [np.zeros((e.dim, e.dim), dtype=complex) for _ in range(e.n_states)]
        for j, t in alloc.items():
            pis[j] = t * kernels[j]
        pi0 = np.eye(e.dim) - sum(pis)
        if min_eigenvalue(pi0) < -1e-12:
            return None
        pi0 = _clip_psd(pi0)
        try:
            return Povm(pi0, tuple(pis))
        except ValueError:
            return None

    candidates: list[dict[int, float]] = []
    keys = sorted(kernels)
    total = sum(weights[j] for j in keys)
    if total > 1e-12:
        t = (1.0 - Q) / total
        candidates.append({j: t for j in keys})
    for j in keys:
        if weights[j] > 1e-12:
            candidates.append({j: (1.0 - Q) / weights[j]})
    for i, j in [(x, y) for x in keys for y in keys if x < y]:
        for u in np.linspace(0.0, 1.0, 33):
            denom = u * weights[i] + (1.0 - u) * weights[j]
            if denom > 1e-12:
                t = (1.0 - Q) / denom
                candidates.append({i: u * t, j: (1.0 - u) * t})

    cert = DualCertificate(z, a)
    for alloc in candidates:
        povm = _attempt(alloc)
        if povm is None:
            continue
        card = certify(e, povm, cert, Q, tol=tol)
        if card.optimal:
            return Solution(
                povm=povm,
                certificate=cert,
                Q=Q,
                Pc=card.Pc,
                regime=REGIME_LARGE_Q,
            )
    return None


def _clip_psd(matrix: np.ndarray) -> np.ndarray:
    dec = eig_hermitian(matrix)
    lam = np.clip(dec.eigenvalues, 0.0, None)
    return (dec.eigenvectors * lam) @ dec.eigenvectors.conj().T


def find_Qu(e: Ensemble, solver_curve, tol: float = 1e-9) -> QuRegime:
    """Smallest Q at which solver_curve(Q) meets max_j C_j * (1 - Q).

    Located by bisection to within 1e-10.  The curve must agree with the
    saturated line at Q = 1; otherwise the solver output is inconsistent
    with the confidence analysis and an error is raised.
    """
    a = max_confidence(e).a_large_Q

    def saturated(q: float) -> bool:
        return abs(solver_curve(q) - a * (1.0 - q)) <= tol

    if saturated(0.0):
        return QuRegime(0.0, "saturated from Q = 0")
    hi = 1.0 - 1e-9
    if not saturated(hi):
        raise ValueError(
            "value curve never meets the saturated line max_j C_j * (1 - Q); "
            "solver output is inconsistent"
        )
    lo = 0.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if saturated(mid):
            hi = mid
        else:
            lo = mid
    return QuRegime(hi, "bisection on the value curve")
