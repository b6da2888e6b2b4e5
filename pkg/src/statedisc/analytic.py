"""Closed-form solvers for the families with known solutions.

Covered families:

* a uniformly mixed qudit state versus a pure one, in any dimension;
* N equiprobable equal-purity qubit states (the resolving-weights branch);
* two-group phase-symmetric qubit states, including the equiprobable and
  the mirror-symmetric (two pure states plus a pole state) special cases.

Each solver returns a full `Solution` (measurement, dual certificate,
rates, regime label) and, for the symmetric machinery, the internal scalar
quantities of the derivation so tests can cross-check every intermediate.
The piecewise structure over the inconclusive rate Q is exposed through
`PiecewiseSolution` objects with located breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize

from . import confidence as _confidence
from .certifier import DualCertificate, Povm, Solution, certify
from .ensemble import (
    Ensemble,
    PartialSymmetrySpec,
    build_partially_symmetric,
    equal_prior_equal_purity,
    uniform_plus_pure,
)
from .operators import eig_hermitian, projector, vec4, zero_eigenvector

REGIME_ALL = "ALL_GROUPS"
REGIME_GROUP1 = "GROUP1_ONLY"
REGIME_GROUP2 = "GROUP2_ONLY"
REGIME_LARGE_Q = _confidence.REGIME_LARGE_Q
REGIME_SINGLE = "SINGLE_STATE"

_GATE = 1e-11


class SolverError(RuntimeError):
    """No branch of a closed-form solver produced a certified measurement."""


@dataclass(frozen=True)
class SymmetricInternals:
    """Scalar internals of the two-group machinery for one solved Q."""

    z00: float | None = None
    z11: float | None = None
    A1: float | None = None
    A2: float | None = None
    f0: float | None = None
    f1: float | None = None
    F: float | None = None
    F_u: float | None = None
    C: float | None = None
    C_prime: float | None = None
    d0: float | None = None
    d1: float | None = None
    eta0: float | None = None
    eta_cr: float | None = None
    alphas: tuple[float, ...] = ()


@dataclass(frozen=True)
class PiecewiseSolution:
    """Branch structure of the optimum as a function of Q.

    `segments` holds (lo, hi, regime) intervals covering [0, 1]; `value`
    evaluates the optimum at any Q by dispatching into the solver.
    """

    segments: tuple[tuple[float, float, str], ...]
    Q_cr: float | None
    Q_cr_prime: float | None
    Q_u: float
    _solver: object

    def regime(self, Q: float) -> str:
        for lo, hi, label in self.segments:
            if lo - 1e-12 <= Q <= hi + 1e-12:
                return label
        raise ValueError(f"Q={Q!r} outside [0, 1]")

    def value(self, Q: float) -> float:
        return self._solver(Q).Pc

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(hi for lo, hi, _ in self.segments[:-1])


# ---------------------------------------------------------------------------
# Uniformly mixed versus pure qudit state
# ---------------------------------------------------------------------------


def umix_value(d: int, eta2: float, Q: float) -> float:
    """Optimal correct rate for {I/d, |psi><psi|} at inconclusive rate Q."""
    eta1 = 1.0 - eta2
    q_u = eta1 / d + eta2
    if Q >= q_u:
        return 1.0 - Q
    if eta2 >= 1.0 / (d + 1):
        return 1.0 - eta1 / d - d * eta2 * Q / (eta1 + d * eta2)
    return eta1 - eta1 * Q / (eta1 + d * eta2)


def solve_umix(d: int, eta2: float, Q: float, psi: np.ndarray | None = None) -> Solution:
    """Discriminate a uniformly mixed from a pure qudit state at fixed Q.

    Below Q_u = eta1/d + eta2 the inconclusive element is rank one along
    the pure state; past Q_u errors vanish and the optimum is 1 - Q.  At
    eta2 = 1/(d+1) two distinct optimal measurements exist and the second
    is attached as an alternate.
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q={Q!r} outside [0, 1]")
    e = uniform_plus_pure(d, eta2, psi)
    ket = eig_hermitian(e.states[1].matrix).eigenvectors[:, -1]
    proj = projector(ket)
    eye = np.eye(d)
    eta1 = 1.0 - eta2
    q_u = eta1 / d + eta2
    denom = eta1 + d * eta2
    zero = np.zeros((d, d), dtype=complex)

    if Q > q_u + 1e-12:
        pi1 = d * (1.0 - Q) / ((d - 1) * eta1) * (eye - proj)
        povm = Povm(eye - pi1, (pi1, zero))
        cert = DualCertificate(e.average_matrix(), 1.0)
        sol = Solution(povm, cert, Q, umix_value(d, eta2, Q), REGIME_LARGE_Q)
        return sol

    pi0 = (d * Q / denom) * proj

    def _guess_both() -> tuple[Povm, DualCertificate]:
        z = eta2 * proj + (eta1 / d) * (eye - proj)
        a = d * eta2 / denom
        pi2 = (1.0 - d * Q / denom) * proj
        return Povm(pi0, (eye - proj, pi2)), DualCertificate(z, a)

    def _guess_mixed_only() -> tuple[Povm, DualCertificate]:
        z = (eta1 / d) * eye
        a = eta1 / denom
        pi1 = eye - (Q * d / denom) * proj
        return Povm(pi0, (pi1, zero)), DualCertificate(z, a)

    tie = abs(eta2 - 1.0 / (d + 1)) <= 1e-12
    if eta2 >= 1.0 / (d + 1):
        povm, cert = _guess_both()
        regime = REGIME_ALL
        alternates = (_guess_mixed_only()[0],) if tie else ()
    else:
        povm, cert = _guess_mixed_only()
        regime = REGIME_SINGLE
        alternates = ()
    return Solution(povm, cert, Q, umix_value(d, eta2, Q), regime, alternates=alternates)


def piecewise_umix(d: int, eta2: float) -> PiecewiseSolution:
    q_u = (1.0 - eta2) / d + eta2
    label = REGIME_ALL if eta2 >= 1.0 / (d + 1) else REGIME_SINGLE
    return PiecewiseSolution(
        segments=((0.0, q_u, label), (q_u, 1.0, REGIME_LARGE_Q)),
        Q_cr=None,
        Q_cr_prime=None,
        Q_u=q_u,
        _solver=lambda q: solve_umix(d, eta2, q),
    )


# ---------------------------------------------------------------------------
# Equiprobable equal-purity qubit states
# ---------------------------------------------------------------------------


def _rho_pole(e: Ensemble) -> tuple[float, np.ndarray, bool]:
    """Largest eigenvalue of the average state with its eigenvector."""
    dec = eig_hermitian(e.average_matrix())
    r = float(dec.eigenvalues[-1])
    degenerate = dec.eigenvalues[-1] - dec.eigenvalues[0] < 1e-12
    if degenerate:
        pole = np.array([1.0, 0.0], dtype=complex)
    else:
        pole = dec.eigenvectors[:, -1]
    return r, pole, degenerate


def solve_equiprobable(e: Ensemble, Q: float) -> Solution | None:
    """Resolving-weights solution for equal priors 1/N and equal purity.

    Returns None when the ensemble does not have the required structure or
    when no nonnegative weights complete the measurement at this Q, in
    which case the caller should fall through to the general machinery.
    """
    if e.dim != 2 or not 0.0 <= Q <= 1.0:
        return None
    p = equal_prior_equal_purity(e)
    if p is None:
        return None
    n = e.n_states
    r, pole, degenerate = _rho_pole(e)
    if Q > r + 1e-12:
        return None

    directions = []
    for state in e.states:
        dec = eig_hermitian(state.matrix)
        directions.append(dec.eigenvectors[:, -1])

    pole_candidates = [pole]
    if degenerate:
        pole_candidates = directions + [np.array([1.0, 0.0]), np.array([0.0, 1.0])]

    z = (1.0 + p) / (2.0 * n) * np.eye(2)
    basis = np.column_stack([vec4(projector(v)) for v in directions])
    for pole_vec in pole_candidates:
        a = (1.0 + p) / (2.0 * n * r)
        target = vec4(np.eye(2) - (Q / r) * projector(pole_vec))
        alphas, residual = scipy.optimize.nnls(basis, target)
        if residual > 1e-10:
            continue
        pis = tuple(alpha * projector(v) for alpha, v in zip(alphas, directions))
        try:
            povm = Povm((Q / r) * projector(pole_vec), pis)
        except ValueError:
            continue
        cert = DualCertificate(z, a)
        card = certify(e, povm, cert, Q)
        if card.optimal:
            return Solution(povm, cert, Q, card.Pc, REGIME_ALL)
    return None


def equiprobable_value(n: int, p: float, r: float, Q: float) -> float:
    """(1+p)/N * (1 - Q/(2r)); valid only while resolving weights exist."""
    return (1.0 + p) / n * (1.0 - Q / (2.0 * r))


# ---------------------------------------------------------------------------
# Two-group phase-symmetric qubit states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Groups:
    """Scalar data of the two groups in the construction basis."""

    e: Ensemble
    spec: PartialSymmetrySpec
    r: float
    u1: float
    v1: float
    w1: float
    u2: float
    v2: float
    w2: float

    @classmethod
    def from_spec(cls, spec: PartialSymmetrySpec) -> "_Groups":
        e = build_partially_symmetric(spec)
        u1 = spec.eta * spec.s
        v1 = spec.eta * (1.0 - spec.s)
        w1 = (spec.eta * spec.p) ** 2 * spec.b * (1.0 - spec.b)
        u2 = spec.eta_prime * spec.s_prime
        v2 = spec.eta_prime * (1.0 - spec.s_prime)
        w2 = (spec.eta_prime * spec.p_prime) ** 2 * spec.c * (1.0 - spec.c)
        return cls(e, spec, spec.r, u1, v1, w1, u2, v2, w2)

    def group_indices(self, which: int) -> range:
        if which == 1:
            return range(self.spec.n1)
        return range(self.spec.n1, self.spec.n)


def _sparse_splits(count: int, total: float) -> list[np.ndarray]:
    """Alternative weight splits that cancel the group's phase sum.

    Besides the symmetric split total/count, an even group admits a
    two-state antipodal split and an odd group a three-state split; both
    reproduce the same measurement statistics.
    """
    splits = []
    if count >= 4 and count % 2 == 0:
        w = np.zeros(count)
        w[0] = w[count // 2] = total / 2.0
        splits.append(w)
    if count >= 3 and count % 2 == 1:
        w = np.zeros(count)
        cos = np.cos(np.pi / count)
        w[0] = w[1] = total / (2.0 + 2.0 * cos)
        w[(count + 1) // 2] = total * cos / (1.0 + cos)
        splits.append(w)
    return splits


def _pole_axis(which: int) -> np.ndarray:
    vec = np.zeros(2, dtype=complex)
    vec[which] = 1.0
    return vec


def _assemble_symmetric(
    g: _Groups,
    Q: float,
    z00: float,
    z11: float,
    pole: int,
    weights1: np.ndarray,
    weights2: np.ndarray,
    regime: str,
    internals: SymmetricInternals,
    with_alternates: bool = True,
) -> Solution | None:
    """Build measurement + certificate from the diagonal witness and weights."""
    spec, e, r = g.spec, g.e, g.r
    z = np.diag([z00, z11]).astype(complex)
    a = min(z00 / r, z11 / (1.0 - r))
    if a < -1e-12:
        return None
    beta = Q / r if pole == 0 else Q / (1.0 - r)
    if beta < -1e-12 or beta > 1.0 + 1e-9:
        return None

    def _detectors(weights1: np.ndarray, weights2: np.ndarray) -> Povm | None:
        pis = []
        for j in range(spec.n):
            alpha = weights1[j] if j < spec.n1 else weights2[j - spec.n1]
            if alpha <= 1e-13:
                pis.append(np.zeros((2, 2), dtype=complex))
                continue
            gap = z - e.weighted(j)
            try:
                ket = zero_eigenvector(gap, tol=1e-8)
            except ValueError:
                return None
            pis.append(alpha * projector(ket))
        pi0 = beta * projector(_pole_axis(pole))
        try:
            return Povm(pi0, tuple(pis))
        except ValueError:
            return None

    povm = _detectors(weights1, weights2)
    if povm is None:
        return None
    cert = DualCertificate(z, max(a, 0.0))
    card = certify(e, povm, cert, Q)
    if not card.optimal:
        return None

    alternates: list[Povm] = []
    if with_alternates:
        total1 = float(np.sum(weights1))
        total2 = float(np.sum(weights2))
        for alt1 in _sparse_splits(spec.n1, total1) if total1 > 1e-12 else []:
            alt = _detectors(alt1, weights2)
            if alt is not None and certify(e, alt, cert, Q).optimal:
                alternates.append(alt)
        if spec.n2 > 0 and total2 > 1e-12:
            for alt2 in _sparse_splits(spec.n2, total2):
                alt = _detectors(weights1, alt2)
                if alt is not None and certify(e, alt, cert, Q).optimal:
                    alternates.append(alt)

    alphas = tuple(float(x) for x in np.concatenate([weights1, weights2]))
    return Solution(
        povm,
        cert,
        Q,
        card.Pc,
        regime,
        internals=replace(internals, z00=z00, z11=z11, alphas=alphas),
        alternates=tuple(alternates),
    )


def _both_groups_roots(g: _Groups) -> list[tuple[float, float]]:
    """Solutions (z00, z11) of the coupled rank-deficiency conditions.

    Eliminating z11 through the first group's hyperbola turns the second
    group's condition into a quadratic in z00; both real roots are
    returned.
    """
    u1, v1, w1, u2, v2, w2 = g.u1, g.v1, g.w1, g.u2, g.v2, g.w2
    if g.w1 <= 1e-16 and g.w2 <= 1e-16:
        return []
    a_coef = v1 - v2
    b_coef = -(v1 - v2) * (u1 + u2) + w1 - w2
    c_coef = (v1 - v2) * u1 * u2 - w1 * u2 + w2 * u1
    if abs(a_coef) < 1e-14:
        roots = [] if abs(b_coef) < 1e-14 else [-c_coef / b_coef]
    else:
        disc = b_coef * b_coef - 4.0 * a_coef * c_coef
        if disc < 0.0:
            return []
        s = np.sqrt(disc)
        roots = [(-b_coef - s) / (2 * a_coef), (-b_coef + s) / (2 * a_coef)]
    out = []
    for z00 in roots:
        if abs(z00 - u1) > 1e-14:
            z11 = v1 + w1 / (z00 - u1)
        elif abs(z00 - u2) > 1e-14:
            z11 = v2 + w2 / (z00 - u2)
        else:
            continue
        out.append((float(z00), float(z11)))
    return out


def _branch_both(g: _Groups, Q: float) -> Solution | None:
    """All states from both groups are guessed."""
    spec, r = g.spec, g.r
    if spec.n2 == 0:
        return None
    candidates = []
    for z00, z11 in _both_groups_roots(g):
        if z00 < g.u1 - _GATE or z00 < g.u2 - _GATE:
            continue
        if z11 < g.v1 - _GATE or z11 < g.v2 - _GATE:
            continue
        k0, k1 = z00 / r, z11 / (1.0 - r)
        if abs(k0 - k1) <= 1e-13:
            continue  # witness proportional to the average: saturated regime
        if k0 < k1:
            f0, f1, pole = 1.0, 1.0 - Q / r, 0
        else:
            f0, f1, pole = 1.0 - Q / (1.0 - r), 1.0, 1
        if min(f0, f1) < -_GATE:
            continue
        t = z00 + z11
        if t - spec.eta <= 1e-13 or t - spec.eta_prime <= 1e-13:
            continue
        m = np.array(
            [
                [(z00 - g.u1) / (t - spec.eta), (z00 - g.u2) / (t - spec.eta_prime)],
                [(z11 - g.v1) / (t - spec.eta), (z11 - g.v2) / (t - spec.eta_prime)],
            ]
        )
        if abs(np.linalg.det(m)) < 1e-14:
            continue
        a1, a2 = np.linalg.solve(m, [f0, f1])
        if a1 < -1e-10 or a2 < -1e-10:
            continue
        candidates.append((t, z00, z11, pole, f0, f1, float(a1), float(a2)))
    if not candidates:
        return None
    candidates.sort(key=lambda item: item[0])
    for t, z00, z11, pole, f0, f1, a1, a2 in candidates:
        internals = SymmetricInternals(A1=a1, A2=a2, f0=f0, f1=f1)
        weights1 = np.full(spec.n1, max(a1, 0.0) / spec.n1)
        weights2 = np.full(spec.n2, max(a2, 0.0) / spec.n2)
        sol = _assemble_symmetric(
            g, Q, z00, z11, pole, weights1, weights2, REGIME_ALL, internals
        )
        if sol is not None:
            return sol
    return None


def saturation_threshold(r: float, s: float, p: float, b: float) -> float:
    """The F ratio at which the single-group witness degenerates to a*rho."""
    w = p * np.sqrt(b * (1.0 - b))
    gap = (r - s) / (2.0 * r * w)
    return float((np.sqrt(gap * gap + (1.0 - r) / r) - gap) ** 2)


def _branch_one_group(g: _Groups, Q: float, which: int) -> Solution | None:
    """Only states of one group are guessed (weights of the other vanish)."""
    spec, r = g.spec, g.r
    if which == 1:
        n_g, lat, pur, prior, s_g = spec.n1, spec.b, spec.p, spec.eta, spec.s
        u_o, v_o, w_o = g.u2, g.v2, g.w2
        prior_other = spec.eta_prime if spec.n2 > 0 else None
        regime = REGIME_GROUP1
    else:
        if spec.n2 == 0:
            return None
        n_g, lat, pur, prior, s_g = (
            spec.n2,
            spec.c,
            spec.p_prime,
            spec.eta_prime,
            spec.s_prime,
        )
        u_o, v_o, w_o = g.u1, g.v1, g.w1
        prior_other = spec.eta
        regime = REGIME_GROUP2
    w_g = pur * pur * lat * (1.0 - lat)
    if w_g <= 1e-16:
        return None
    f_u = saturation_threshold(r, s_g, pur, lat)
    if f_u <= 1.0:
        f0, f1, pole = 1.0, 1.0 - Q / r, 0
        f_ratio = f1
        if f_ratio < f_u - 1e-12:
            return None
    else:
        if Q >= 1.0 - r:
            return None
        f0, f1, pole = 1.0 - Q / (1.0 - r), 1.0, 1
        f_ratio = 1.0 / f0
        if f_ratio > f_u + 1e-12:
            return None
    if f_ratio <= 1e-14:
        return None
    root = np.sqrt(lat * (1.0 - lat))
    z00 = prior * (s_g + pur * root / np.sqrt(f_ratio))
    z11 = prior * (1.0 - s_g + pur * root * np.sqrt(f_ratio))
    # Positivity against the silent group: diagonal entries and determinant.
    if prior_other is not None:
        if z00 - u_o < -_GATE or z11 - v_o < -_GATE:
            return None
        if (z00 - u_o) * (z11 - v_o) < w_o - _GATE:
            return None
    t = z00 + z11
    if t - prior <= 1e-13:
        return None
    a1 = f0 + f1
    if a1 < -1e-10:
        return None
    internals = SymmetricInternals(
        A1=a1 if which == 1 else 0.0,
        A2=a1 if which == 2 else 0.0,
        f0=f0,
        f1=f1,
        F=f_ratio,
        F_u=f_u,
    )
    weights_g = np.full(n_g, max(a1, 0.0) / n_g)
    if which == 1:
        weights1, weights2 = weights_g, np.zeros(spec.n2)
    else:
        weights1, weights2 = np.zeros(spec.n1), weights_g
    return _assemble_symmetric(g, Q, z00, z11, pole, weights1, weights2, regime, internals)


def _branch_large_q(g: _Groups, Q: float) -> Solution | None:
    sol = _confidence.large_q_solution(g.e, Q)
    if sol is None:
        return None
    report = _confidence.max_confidence(g.e)
    internals = SymmetricInternals(
        C=report.C[0],
        C_prime=report.C[g.spec.n1] if g.spec.n2 > 0 else None,
    )
    return replace(sol, internals=internals)


def solve_partially_symmetric(
    spec: PartialSymmetrySpec, Q: float
) -> tuple[Solution, SymmetricInternals]:
    """Optimal discrimination of a two-group phase-symmetric ensemble.

    Branches are tried in the order: guess both groups, guess only group 1,
    guess only group 2, saturated regime.  The first branch whose
    measurement certifies wins; for valid parameters one always does.
    """
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q={Q!r} outside [0, 1]")
    g = _Groups.from_spec(spec)
    report = _confidence.max_confidence(g.e)
    c1 = report.C[0]
    c2 = report.C[spec.n1] if spec.n2 > 0 else None
    for attempt in (
        lambda: _branch_both(g, Q),
        lambda: _branch_one_group(g, Q, 1),
        lambda: _branch_one_group(g, Q, 2),
        lambda: _branch_large_q(g, Q),
    ):
        sol = attempt()
        if sol is not None:
            internals = sol.internals or SymmetricInternals()
            internals = replace(internals, C=c1, C_prime=c2)
            sol = replace(sol, internals=internals)
            return sol, internals
    raise SolverError(
        f"no branch certified for spec {spec} at Q={Q}; "
        "this indicates inconsistent parameters or a numerical failure"
    )


def piecewise_partially_symmetric(
    spec: PartialSymmetrySpec, probes: int = 129
) -> PiecewiseSolution:
    """Locate the branch structure over Q by probing and bisecting."""

    def solver(q: float) -> Solution:
        return solve_partially_symmetric(spec, q)[0]

    return _piecewise_from_solver(solver, probes)


def _piecewise_from_solver(solver, probes: int) -> PiecewiseSolution:
    grid = np.linspace(0.0, 1.0, probes)
    labels = [solver(q).regime for q in grid]
    cuts = []
    for k in range(len(grid) - 1):
        if labels[k] == labels[k + 1]:
            continue
        lo, hi = grid[k], grid[k + 1]
        left = labels[k]
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            if solver(mid).regime == left:
                lo = mid
            else:
                hi = mid
        cuts.append((0.5 * (lo + hi), labels[k], labels[k + 1]))
    segments = []
    start = 0.0
    for q, left, _right in cuts:
        segments.append((start, q, left))
        start = q
    segments.append((start, 1.0, labels[-1]))

    q_u = 1.0
    q_cr = None
    q_cr_prime = None
    for q, left, right in cuts:
        if right == REGIME_LARGE_Q:
            q_u = q
        elif right == REGIME_ALL:
            q_cr_prime = q
        elif left == REGIME_ALL:
            q_cr = q
    if segments[-1][2] != REGIME_LARGE_Q:
        q_u = 1.0
    elif len(segments) == 1:
        q_u = 0.0
    return PiecewiseSolution(
        segments=tuple(segments),
        Q_cr=q_cr,
        Q_cr_prime=q_cr_prime,
        Q_u=q_u,
        _solver=solver,
    )


# ---------------------------------------------------------------------------
# Mirror-symmetric pure states
# ---------------------------------------------------------------------------


def mirror_spec(b: float, eta: float) -> PartialSymmetrySpec:
    if not 0.0 < eta < 0.5:
        raise ValueError(f"eta={eta!r} outside (0, 1/2)")
    return PartialSymmetrySpec(
        n1=2,
        n2=1,
        b=b,
        c=1.0,
        p=1.0,
        p_prime=1.0,
        eta=eta,
        eta_prime=1.0 - 2.0 * eta,
    )


def mirror_quantities(b: float, eta: float) -> SymmetricInternals:
    """Closed-form scalars of the mirror family (pure pair plus pole state)."""
    r = 1.0 - 2.0 * eta * (1.0 - b)
    c_big = eta * (r + b * (1.0 - 2.0 * r)) / (r * (1.0 - r))
    c_small = (1.0 - 2.0 * eta) / r
    return SymmetricInternals(
        C=c_big,
        C_prime=c_small,
        eta0=1.0 / (2.0 + 4.0 * b),
        eta_cr=1.0 / (2.0 + b + np.sqrt(b * (1.0 - b))),
        F_u=b * (1.0 - r) ** 2 / ((1.0 - b) * r * r),
        d0=eta * (1.0 - b),
        d1=(1.0 - 2.0 * eta) - eta * b,
    )


def mirror_breakpoints(b: float, eta: float) -> tuple[float | None, float | None, float]:
    """(Q_cr, Q_cr', Q_u) of the mirror family; None where a branch is absent."""
    quant = mirror_quantities(b, eta)
    r = 1.0 - 2.0 * eta * (1.0 - b)
    denom = 1.0 - eta * (2.0 + b)
    if eta >= quant.eta0:
        q_cr = r * (1.0 - eta * eta * b * (1.0 - b) / denom**2) if denom > 0 else -1.0
        f_u = quant.F_u
        q_u = r * (1.0 - f_u) if f_u <= 1.0 else (1.0 - r) * (1.0 - 1.0 / f_u)
        return (q_cr if q_cr > 0 else None), None, q_u
    q_cr_prime = (1.0 - r) * (1.0 - denom**2 / (eta * eta * b * (1.0 - b)))
    return None, (q_cr_prime if q_cr_prime > 0 else None), 1.0 - r


def mirror_value(b: float, eta: float, Q: float) -> float:
    """Closed-form optimum of the mirror family, branch-dispatched."""
    quant = mirror_quantities(b, eta)
    r = 1.0 - 2.0 * eta * (1.0 - b)
    denom = 1.0 - eta * (2.0 + b)
    root = np.sqrt(b * (1.0 - b))
    q_cr, q_cr_prime, q_u = mirror_breakpoints(b, eta)

    def p_two(q: float) -> float:
        if quant.F_u <= 1.0:
            return eta * (1.0 - (b / r) * q + 2.0 * root * np.sqrt(1.0 - q / r))
        return eta * (
            1.0 - ((1.0 - b) / (1.0 - r)) * q + 2.0 * root * np.sqrt(1.0 - q / (1.0 - r))
        )

    if eta >= quant.eta0:
        if q_cr is not None and Q <= q_cr:
            return (1.0 - 2.0 * eta) * ((1.0 - eta * (1.0 + 2.0 * b)) / denom - Q / r)
        if Q <= q_u:
            return p_two(Q)
        return quant.C * (1.0 - Q)
    if q_cr_prime is not None and Q <= q_cr_prime:
        return p_two(Q)
    if Q <= q_u:
        return (
            (1.0 - 2.0 * eta)
            / denom
            * (1.0 - eta * (1.0 + 2.0 * b) - eta * (1.0 - b) * Q / (1.0 - r))
        )
    return quant.C_prime * (1.0 - Q)


def solve_mirror_symmetric(b: float, eta: float, Q: float) -> tuple[Solution, SymmetricInternals]:
    """Two pure mirror states plus a pole state, solved at fixed Q."""
    sol, internals = solve_partially_symmetric(mirror_spec(b, eta), Q)
    quant = mirror_quantities(b, eta)
    internals = replace(
        internals,
        eta0=quant.eta0,
        eta_cr=quant.eta_cr,
        d0=quant.d0,
        d1=quant.d1,
    )
    return replace(sol, internals=internals), internals


def piecewise_mirror_symmetric(b: float, eta: float) -> PiecewiseSolution:
    piece = piecewise_partially_symmetric(mirror_spec(b, eta))
    q_cr, q_cr_prime, q_u = mirror_breakpoints(b, eta)
    return replace(piece, Q_cr=q_cr, Q_cr_prime=q_cr_prime, Q_u=q_u)
