"""Independent brute-force lower bound for qubit ensembles.

The search space is measurements whose detection operators are rank-one
(plus the two rank-two shapes that occur when a single state is guessed or
when the inconclusive element absorbs everything outside one or two guessed
directions).  For a fixed assignment of Bloch directions the completeness
relation is linear in the weights and is solved exactly, so every candidate
is a genuinely feasible measurement hitting the requested inconclusive rate;
the returned value is therefore always a valid lower bound on the optimum.
Candidate directions come from a seeded quasi-random stream (prefix-nested,
so doubling the resolution can only improve the result) plus structured
seeds at the states' own Bloch directions, refined by derivative-free
coordinate descent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .certifier import Povm, measure_rates
from .ensemble import Ensemble

_BISECT_ITERS = 30  # weight precision ~1e-9 during search
_BUILD_ITERS = 60  # final measurement construction


@dataclass(frozen=True)
class SearchConfig:
    """Budget of the brute-force search."""

    resolution: int = 128
    refinement: int = 40
    seed: int = 7

    def __post_init__(self):
        if self.resolution < 8:
            raise ValueError(f"resolution must be at least 8, got {self.resolution}")


def _bloch_split(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Write a 2x2 Hermitian matrix as (t*I + v.sigma)/2."""
    t = float(np.trace(matrix).real)
    v = np.array(
        [
            2.0 * matrix[1, 0].real,
            2.0 * matrix[1, 0].imag,
            (matrix[0, 0] - matrix[1, 1]).real,
        ]
    )
    return t, v


def _dirs_from_params(u: np.ndarray) -> np.ndarray:
    """Map rows of [0,1]^2 to unit Bloch vectors (area-uniform)."""
    cz = 2.0 * u[..., 0] - 1.0
    phi = 2.0 * np.pi * u[..., 1]
    st = np.sqrt(np.clip(1.0 - cz * cz, 0.0, None))
    return np.stack([st * np.cos(phi), st * np.sin(phi), cz], axis=-1)


def _params_from_dir(n: np.ndarray) -> np.ndarray:
    cz = float(np.clip(n[2], -1.0, 1.0))
    phi = float(np.arctan2(n[1], n[0])) % (2.0 * np.pi)
    return np.array([(cz + 1.0) / 2.0, phi / (2.0 * np.pi)])


def _matrix_from_dir(weight: float, n: np.ndarray) -> np.ndarray:
    return 0.5 * np.array(
        [
            [weight * (1.0 + n[2]), weight * (n[0] - 1j * n[1])],
            [weight * (n[0] + 1j * n[1]), weight * (1.0 - n[2])],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class _Kind:
    """One combinatorial shape of candidate measurement."""

    style: str  # "guess" (rank-one detectors) or "full0" (rank-two Pi0)
    subset: tuple[int, ...]

    def n_params(self, q_positive: bool) -> int:
        m = len(self.subset)
        if self.style == "guess":
            pole = 2 if q_positive else 0
            return pole + max(0, 2 * (m - 1)) + max(0, m - 2)
        return 2 * m + (m - 1)


class _Evaluator:
    """Batched Pc evaluation and single-candidate POVM construction."""

    def __init__(self, e: Ensemble, Q: float):
        self.e = e
        self.Q = float(Q)
        _, self.m_avg = _bloch_split(e.average_matrix())
        self.traces = np.array(e.priors)
        self.vecs = np.stack([_bloch_split(e.weighted(j))[1] for j in range(e.n_states)])

    def _pole(self, u: np.ndarray):
        """Inconclusive weight for rank-one Pi0 along the sampled direction."""
        n0 = _dirs_from_params(u)
        mean = 0.5 * (1.0 + n0 @ self.m_avg)
        with np.errstate(divide="ignore", invalid="ignore"):
            beta = np.where(mean > 1e-12, self.Q / mean, np.inf)
        ok = beta <= 1.0 + 1e-12
        return n0, np.clip(beta, 0.0, None), ok

    def _pc_term(self, j: int, weight: np.ndarray, n: np.ndarray) -> np.ndarray:
        return 0.5 * weight * (self.traces[j] + n @ self.vecs[j])

    def eval_guess(self, subset: tuple[int, ...], params: np.ndarray) -> np.ndarray:
        """Pc of the rank-one-detector family; -1 marks infeasible rows."""
        params = np.atleast_2d(params)
        b = params.shape[0]
        m = len(subset)
        k = 0
        if self.Q > 0.0:
            n0, beta, ok = self._pole(params[:, 0:2])
            k = 2
        else:
            n0 = np.zeros((b, 3))
            beta = np.zeros(b)
            ok = np.ones(b, dtype=bool)
        total = 2.0 - beta
        if m == 1:
            # Guess one state with everything outside Pi0.
            pc = self.traces[subset[0]] - self._pc_term(subset[0], beta, n0)
            return np.where(ok, pc, -1.0)
        dirs = [_dirs_from_params(params[:, k + 2 * i : k + 2 * i + 2]) for i in range(m - 1)]
        k += 2 * (m - 1)
        fracs = [params[:, k + i] for i in range(m - 2)]
        weights = []
        avail = total.copy()
        for i in range(m - 2):
            w = fracs[i] * avail
            weights.append(w)
            avail = avail - w
        v_acc = -beta[:, None] * n0
        ssum = np.zeros(b)
        for w, n in zip(weights, dirs[: m - 2]):
            v_acc = v_acc - w[:, None] * n
            ssum = ssum + w
        n_last_free = dirs[m - 2]
        lo = np.zeros(b)
        hi = np.clip(avail, 0.0, None)

        def closure_gap(alpha: np.ndarray) -> np.ndarray:
            rest = v_acc - alpha[:, None] * n_last_free
            return ssum + alpha + np.linalg.norm(rest, axis=1) - total

        ok &= closure_gap(lo) <= 1e-12
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            high = closure_gap(mid) > 0.0
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        alpha_pen = 0.5 * (lo + hi)
        weights.append(alpha_pen)
        rest = v_acc - alpha_pen[:, None] * n_last_free
        alpha_last = np.linalg.norm(rest, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            n_last = np.where(alpha_last[:, None] > 1e-14, rest / alpha_last[:, None], 0.0)
        weights.append(alpha_last)
        dirs.append(n_last)
        pc = np.zeros(b)
        for j, w, n in zip(subset, weights, dirs):
            pc += self._pc_term(j, w, n)
        return np.where(ok, pc, -1.0)

    def eval_full0(self, subset: tuple[int, ...], params: np.ndarray) -> np.ndarray:
        """Pc when Pi0 = I - sum of at most two rank-one detectors."""
        params = np.atleast_2d(params)
        m = len(subset)
        dirs = [_dirs_from_params(params[:, 2 * i : 2 * i + 2]) for i in range(m)]
        if m == 1:
            raw = [np.ones(params.shape[0])]
        else:
            f = params[:, 2 * m]
            raw = [f, 1.0 - f]
        denom = np.zeros(params.shape[0])
        for w, n in zip(raw, dirs):
            denom = denom + w * 0.5 * (1.0 + n @ self.m_avg)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(denom > 1e-12, (1.0 - self.Q) / denom, np.inf)
        weights = [scale * w for w in raw]
        acc_t = np.zeros(params.shape[0])
        acc_v = np.zeros((params.shape[0], 3))
        pc = np.zeros(params.shape[0])
        for j, w, n in zip(subset, weights, dirs):
            acc_t += w
            acc_v += w[:, None] * n
            pc += self._pc_term(j, w, n)
        lam_max = 0.5 * acc_t + 0.5 * np.linalg.norm(acc_v, axis=1)
        ok = np.isfinite(scale) & (lam_max <= 1.0 + 1e-12)
        return np.where(ok, pc, -1.0)

    def evaluate(self, kind: _Kind, params: np.ndarray) -> np.ndarray:
        if kind.style == "guess":
            return self.eval_guess(kind.subset, params)
        return self.eval_full0(kind.subset, params)

    def build_povm(self, kind: _Kind, params: np.ndarray) -> Povm | None:
        """Materialize one parameter row as a feasible measurement."""
        params = np.asarray(params, dtype=float)[None, :]
        if self.evaluate(kind, params)[0] < -0.5:
            return None
        n = self.e.n_states
        pis = [np.zeros((2, 2), dtype=complex) for _ in range(n)]
        if kind.style == "guess":
            m = len(kind.subset)
            k = 0
            if self.Q > 0.0:
                n0 = _dirs_from_params(params[:, 0:2])[0]
                beta = self.Q / (0.5 * (1.0 + n0 @ self.m_avg))
                pi0 = _matrix_from_dir(beta, n0)
                k = 2
            else:
                beta = 0.0
                n0 = np.zeros(3)
                pi0 = np.zeros((2, 2), dtype=complex)
            if m == 1:
                pis[kind.subset[0]] = np.eye(2) - pi0
                return Povm(pi0, tuple(pis))
            total = 2.0 - beta
            dirs = [
                _dirs_from_params(params[:, k + 2 * i : k + 2 * i + 2])[0]
                for i in range(m - 1)
            ]
            k += 2 * (m - 1)
            weights = []
            avail = total
            for i in range(m - 2):
                w = float(params[0, k + i]) * avail
                weights.append(w)
                avail -= w
            v_acc = -beta * n0 - sum(w * n for w, n in zip(weights, dirs[: m - 2]))
            ssum = sum(weights)
            lo, hi = 0.0, max(avail, 0.0)
            for _ in range(_BUILD_ITERS):
                mid = 0.5 * (lo + hi)
                gap = ssum + mid + np.linalg.norm(v_acc - mid * dirs[m - 2]) - total
                if gap > 0.0:
                    hi = mid
                else:
                    lo = mid
            alpha_pen = 0.5 * (lo + hi)
            weights.append(alpha_pen)
            rest = v_acc - alpha_pen * dirs[m - 2]
            alpha_last = float(np.linalg.norm(rest))
            n_last = rest / alpha_last if alpha_last > 1e-14 else np.array([0.0, 0.0, 1.0])
            weights.append(alpha_last)
            dirs.append(n_last)
            for j, w, nvec in zip(kind.subset, weights, dirs):
                pis[j] = _matrix_from_dir(max(w, 0.0), nvec)
            total_op = pi0 + sum(pis)
            # Completeness is exact by construction; absorb float dust.
            pi0 = pi0 + (np.eye(2) - total_op)
            return Povm(pi0, tuple(pis))
        m = len(kind.subset)
        dirs = [_dirs_from_params(params[:, 2 * i : 2 * i + 2])[0] for i in range(m)]
        raw = [1.0] if m == 1 else [float(params[0, 2 * m]), 1.0 - float(params[0, 2 * m])]
        denom = sum(w * 0.5 * (1.0 + n @ self.m_avg) for w, n in zip(raw, dirs))
        scale = (1.0 - self.Q) / denom
        for j, w, nvec in zip(kind.subset, raw, dirs):
            pis[j] = _matrix_from_dir(max(scale * w, 0.0), nvec)
        pi0 = np.eye(2) - sum(pis)
        return Povm(pi0, tuple(pis))


def _kinds(e: Ensemble) -> list[_Kind]:
    kinds = []
    n = e.n_states
    for m in range(1, min(n, 4) + 1):
        for subset in itertools.combinations(range(n), m):
            kinds.append(_Kind("guess", subset))
    for m in (1, 2):
        if m <= n:
            for subset in itertools.combinations(range(n), m):
                kinds.append(_Kind("full0", subset))
    return kinds


def _seed_params(ev: _Evaluator, kind: _Kind) -> list[np.ndarray]:
    """Structured starts: point detectors at the states they answer for."""
    state_dirs = []
    for j in range(ev.e.n_states):
        v = ev.vecs[j]
        norm = np.linalg.norm(v)
        state_dirs.append(v / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0]))
    out = []
    q_positive = ev.Q > 0.0
    m = len(kind.subset)
    if kind.style == "guess":
        for pole_sign in (+1.0, -1.0):
            parts = []
            if q_positive:
                m_avg = ev.m_avg
                norm = np.linalg.norm(m_avg)
                pole = pole_sign * (m_avg / norm if norm > 1e-12 else np.array([0, 0, 1.0]))
                parts.append(_params_from_dir(pole))
            for j in kind.subset[: m - 1]:
                parts.append(_params_from_dir(state_dirs[j]))
            parts.append(np.full(max(0, m - 2), 1.0 / max(m, 1)))
            out.append(np.concatenate(parts) if parts else np.zeros(0))
            if not q_positive:
                break
    else:
        parts = [_params_from_dir(state_dirs[j]) for j in kind.subset]
        if m == 2:
            parts.append(np.array([0.5]))
        out.append(np.concatenate(parts))
    return [p for p in out if p.shape[0] == kind.n_params(q_positive)]


def _refine(ev: _Evaluator, kind: _Kind, params0: np.ndarray, iterations: int):
    """Derivative-free coordinate descent with shrinking steps."""
    params = params0.copy()
    best = float(ev.evaluate(kind, params[None, :])[0])
    step = 0.12
    n_par = params.shape[0]
    if n_par == 0:
        return best, params
    for _ in range(iterations):
        probes = np.repeat(params[None, :], 2 * n_par, axis=0)
        for i in range(n_par):
            probes[2 * i, i] = min(1.0, params[i] + step)
            probes[2 * i + 1, i] = max(0.0, params[i] - step)
        vals = ev.evaluate(kind, probes)
        k = int(np.argmax(vals))
        if vals[k] > best + 1e-15:
            best = float(vals[k])
            params = probes[k]
        else:
            step *= 0.7
            if step < 1e-9:
                break
    return best, params


def brute_force(
    e: Ensemble, Q: float, cfg: SearchConfig = SearchConfig()
) -> tuple[float, Povm]:
    """Best correct rate found by direct search; a valid lower bound.

    Returns the measured rate and the measurement achieving it.  The
    fallback when nothing else is feasible is the no-measurement strategy
    Pi0 = Q*I plus always guessing the most likely state.
    """
    if e.dim != 2:
        raise ValueError(f"brute force supports qubits only, got dimension {e.dim}")
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q={Q!r} outside [0, 1]")
    ev = _Evaluator(e, Q)
    rng = np.random.default_rng(cfg.seed)
    kinds = _kinds(e)
    q_positive = Q > 0.0
    max_dim = max(kind.n_params(q_positive) for kind in kinds)
    master = rng.uniform(size=(cfg.resolution, max(max_dim, 1)))

    levels = [8]
    while levels[-1] * 2 <= cfg.resolution:
        levels.append(levels[-1] * 2)
    if levels[-1] != cfg.resolution:
        levels.append(cfg.resolution)

    best_val = -np.inf
    best_pair: tuple[_Kind, np.ndarray] | None = None
    # One refinement start per (shape class, prefix level): keeps the start
    # set of a resolution-R run a subset of the 2R run's, so doubling the
    # resolution can never lose a refined optimum.
    group_best: dict[tuple, tuple[float, _Kind, np.ndarray]] = {}
    for kind in kinds:
        dim = kind.n_params(q_positive)
        pool = master[:, :dim] if dim else np.zeros((cfg.resolution, 0))
        vals = ev.evaluate(kind, pool)
        for level in levels:
            k = int(np.argmax(vals[:level]))
            key = (kind.style, len(kind.subset), level)
            if vals[k] > -0.5 and vals[k] > group_best.get(key, (-np.inf,))[0]:
                group_best[key] = (float(vals[k]), kind, pool[k].copy())
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_pair = (kind, pool[k].copy())
        for s, seed in enumerate(_seed_params(ev, kind)):
            val = float(ev.evaluate(kind, seed[None, :])[0])
            key = (kind.style, len(kind.subset), "seed", s)
            if val > -0.5 and val > group_best.get(key, (-np.inf,))[0]:
                group_best[key] = (val, kind, seed)
            if val > best_val:
                best_val = val
                best_pair = (kind, seed)

    seen = set()
    for _, kind, start in group_best.values():
        tag = (kind.style, kind.subset, start.tobytes())
        if tag in seen:
            continue
        seen.add(tag)
        val, params = _refine(ev, kind, start, cfg.refinement)
        if val > best_val:
            best_val = val
            best_pair = (kind, params)

    povm = ev.build_povm(*best_pair) if best_pair is not None else None
    j_best = int(np.argmax(e.priors))
    baseline = (1.0 - Q) * float(e.priors[j_best])
    if povm is None or best_val < baseline - 1e-15:
        # No-measurement baseline: always feasible at any Q.
        pis = [np.zeros((2, 2), dtype=complex) for _ in range(e.n_states)]
        pis[j_best] = (1.0 - Q) * np.eye(2)
        povm = Povm(Q * np.eye(2), tuple(pis))
    q_meas, pc, _ = measure_rates(e, povm)
    if abs(q_meas - Q) > 1e-9:
        raise RuntimeError(
            f"search produced a measurement at Q={q_meas!r} instead of {Q!r}"
        )
    return pc, povm
