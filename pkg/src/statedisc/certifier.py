"""Feasibility and optimality verification.

A measurement maximizes the correct-guess rate at a fixed inconclusive rate
Q exactly when a Hermitian witness operator Z and a scalar a >= 0 exist
with Z - a*rho and every Z - eta_j*rho_j positive semidefinite and
orthogonal (in the complementarity sense) to the corresponding detection
operators.  This module checks those conditions for candidate triples and
reports the certified value Tr Z - a*Q.  Solvers construct certificates;
this module only arbitrates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble
from .operators import as_hermitian, eig_hermitian, frob_norm, min_eigenvalue

_POVM_TOL = 1e-10
DEFAULT_CERTIFY_TOL = 1e-8


class FeasibilityError(ValueError):
    """A candidate measurement violates positivity or completeness."""


@dataclass(frozen=True)
class Povm:
    """Detection operators: one inconclusive element plus one per state."""

    pi0: np.ndarray
    pis: tuple[np.ndarray, ...]

    def __post_init__(self):
        pi0 = as_hermitian(self.pi0, tol=1e-10)
        pis = tuple(as_hermitian(p, tol=1e-10) for p in self.pis)
        lam = min_eigenvalue(pi0)
        if lam < -_POVM_TOL:
            raise FeasibilityError(f"inconclusive element not PSD (min eigenvalue {lam:.3e})")
        for j, p in enumerate(pis):
            lam = min_eigenvalue(p)
            if lam < -_POVM_TOL:
                raise FeasibilityError(f"detection element {j} not PSD (min eigenvalue {lam:.3e})")
        total = pi0 + sum(pis)
        dev = float(np.max(np.abs(total - np.eye(pi0.shape[0]))))
        if dev > _POVM_TOL:
            raise FeasibilityError(f"completeness violated: max |sum - I| = {dev:.3e}")
        pi0.setflags(write=False)
        for p in pis:
            p.setflags(write=False)
        object.__setattr__(self, "pi0", pi0)
        object.__setattr__(self, "pis", pis)

    @property
    def dim(self) -> int:
        return self.pi0.shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.pis)

    def guessed_states(self, tol: float = 1e-10) -> tuple[int, ...]:
        """Indices whose detection operator is nonzero."""
        return tuple(j for j, p in enumerate(self.pis) if frob_norm(p) > tol)


@dataclass(frozen=True)
class DualCertificate:
    """Witness operator and rate multiplier certifying optimality."""

    z: np.ndarray
    a: float

    def __post_init__(self):
        z = as_hermitian(self.z)
        if self.a < -1e-12:
            raise ValueError(f"rate multiplier a={self.a!r} must be nonnegative")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "a", max(0.0, float(self.a)))

    @property
    def trace(self) -> float:
        return float(np.trace(self.z).real)

    def value(self, q: float) -> float:
        """Certified maximum correct-guess rate Tr Z - a*Q."""
        return self.trace - self.a * q


@dataclass(frozen=True)
class Scorecard:
    """Outcome of checking one (POVM, certificate) pair at a fixed Q."""

    Q: float
    Pc: float
    Pe: float
    dual_value: float
    complementarity_residuals: tuple[float, ...]
    psd_margins: tuple[float, ...]
    optimal: bool


@dataclass(frozen=True)
class Solution:
    """A solved instance: measurement, certificate, rates, and regime label."""

    povm: Povm
    certificate: DualCertificate
    Q: float
    Pc: float
    regime: str
    basis_map: np.ndarray | None = None
    case: object | None = None
    internals: object | None = None
    alternates: tuple[Povm, ...] = ()

    @property
    def Pe(self) -> float:
        return 1.0 - self.Q - self.Pc


def measure_rates(e: Ensemble, m: Povm) -> tuple[float, float, float]:
    """(Q, Pc, Pe) of a measurement on an ensemble; Pe = 1 - Q - Pc."""
    if m.dim != e.dim or m.n_outcomes != e.n_states:
        raise FeasibilityError(
            f"measurement shape ({m.dim}, {m.n_outcomes}) does not match "
            f"ensemble ({e.dim}, {e.n_states})"
        )
    q = float(np.trace(e.average_matrix() @ m.pi0).real)
    pc = float(sum(np.trace(e.weighted(j) @ m.pis[j]).real for j in range(e.n_states)))
    return q, pc, 1.0 - q - pc


def certify(
    e: Ensemble,
    m: Povm,
    cert: DualCertificate,
    Q: float,
    tol: float = DEFAULT_CERTIFY_TOL,
) -> Scorecard:
    """Check the optimality conditions at absolute tolerance `tol`.

    `optimal` is True iff all PSD margins are >= -tol, all complementarity
    residuals (Frobenius norm) are <= tol, the measured inconclusive rate
    matches the target Q within tol, and the certified value agrees with
    the measured correct rate within 10*tol.
    """
    if cert.z.shape[0] != e.dim:
        raise ValueError(f"certificate dimension {cert.z.shape[0]} != ensemble {e.dim}")
    q_meas, pc, pe = measure_rates(e, m)
    rho = e.average_matrix()
    gap0 = cert.z - cert.a * rho
    margins = [min_eigenvalue(gap0)]
    residuals = [frob_norm(gap0 @ m.pi0)]
    for j in range(e.n_states):
        gap = cert.z - e.weighted(j)
        margins.append(min_eigenvalue(gap))
        residuals.append(frob_norm(gap @ m.pis[j]))
    dual = cert.value(Q)
    optimal = (
        min(margins) >= -tol
        and max(residuals) <= tol
        and abs(q_meas - Q) <= tol
        and abs(dual - pc) <= 10.0 * tol
    )
    return Scorecard(
        Q=q_meas,
        Pc=pc,
        Pe=pe,
        dual_value=dual,
        complementarity_residuals=tuple(residuals),
        psd_margins=tuple(margins),
        optimal=optimal,
    )


@dataclass(frozen=True)
class PairwiseReport:
    """Residuals of the pairwise witness relation at Q = 0."""

    max_residual: float
    residuals: tuple[tuple[int, int, float], ...]
    skipped: tuple[tuple[int, str], ...] = field(default=())


def pairwise_relation_check(e: Ensemble, cert: DualCertificate) -> PairwiseReport:
    """Check q_k P_k - q_j P_j = eta_j rho_j - eta_k rho_k over state pairs.

    Here q_j = Tr Z - eta_j and P_j is the rank-one projector onto the top
    eigenvector of Z - eta_j rho_j, which for a valid minimum-error witness
    equals (Z - eta_j rho_j)/q_j.  States with q_j <= 0 or with a degenerate
    top eigenvalue (the quotient is then not rank-one) are skipped and
    reported.  Only meaningful for minimum-error (Q = 0) qubit certificates.
    """
    tz = cert.trace
    projectors: dict[int, tuple[float, np.ndarray]] = {}
    skipped: list[tuple[int, str]] = []
    for j in range(e.n_states):
        qj = tz - e.priors[j]
        if qj <= 1e-12:
            skipped.append((j, f"Tr Z - eta_{j} = {qj:.3e} <= 0"))
            continue
        gap = cert.z - e.weighted(j)
        dec = eig_hermitian(gap)
        top = dec.eigenvalues[-1]
        if len(dec.eigenvalues) > 1 and top - dec.eigenvalues[-2] < 1e-10 * max(1.0, top):
            skipped.append((j, "degenerate top eigenvalue, quotient not rank-one"))
            continue
        v = dec.eigenvectors[:, -1]
        projectors[j] = (qj, np.outer(v, v.conj()))
    residuals = []
    worst = 0.0
    keys = sorted(projectors)
    for i, k in enumerate(keys):
        qk, pk = projectors[k]
        for j in keys[i + 1 :]:
            qj, pj = projectors[j]
            res = frob_norm(qk * pk - qj * pj - (e.weighted(j) - e.weighted(k)))
            residuals.append((k, j, res))
            worst = max(worst, res)
    return PairwiseReport(worst, tuple(residuals), tuple(skipped))
