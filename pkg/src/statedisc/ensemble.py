"""Discrimination problem instances.

An `Ensemble` bundles N density operators with their prior probabilities.
Besides generic construction from raw matrices, this module builds the
special qubit families with closed-form solutions (two-group phase-symmetric
states, their mirror-symmetric special case, symmetric single-group states)
and the qudit pair consisting of a uniformly mixed and a pure state.  It
also owns the strict JSON file format used by the command line tools.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .operators import as_hermitian, eig_hermitian, fix_phase, min_eigenvalue

_PRIOR_TOL = 1e-12
_STATE_TOL = 1e-10


class EnsembleError(ValueError):
    """Invalid ensemble data (priors, state matrices, or symmetry parameters)."""


@dataclass(frozen=True)
class DensityOperator:
    """PSD, unit-trace Hermitian matrix representing a quantum state."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_hermitian(self.matrix)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > _STATE_TOL:
            raise EnsembleError(f"density operator trace {tr!r} differs from 1")
        if min_eigenvalue(m) < -_STATE_TOL:
            raise EnsembleError(
                f"density operator has negative eigenvalue {min_eigenvalue(m):.3e}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class QubitStateSpec:
    """Qubit state given by purity and a Bloch direction.

    The density matrix is purity * |psi><psi| + (1 - purity)/2 * I where
    |psi> points along `bloch_direction`.
    """

    purity: float
    bloch_direction: tuple[float, float, float]

    def __post_init__(self):
        if not 0.0 <= self.purity <= 1.0:
            raise EnsembleError(f"purity {self.purity!r} outside [0, 1]")
        n = np.asarray(self.bloch_direction, dtype=float)
        if n.shape != (3,):
            raise EnsembleError("bloch_direction must be a 3-vector")
        norm = float(np.linalg.norm(n))
        if abs(norm - 1.0) > 1e-9:
            raise EnsembleError(f"bloch_direction norm {norm!r} differs from 1")
        object.__setattr__(self, "bloch_direction", tuple(float(x) for x in n))

    @classmethod
    def from_angles(cls, purity: float, theta: float, phi: float) -> "QubitStateSpec":
        n = (
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(theta),
        )
        return cls(purity, n)

    def density_matrix(self) -> np.ndarray:
        nx, ny, nz = self.bloch_direction
        p = self.purity
        return 0.5 * np.array(
            [[1.0 + p * nz, p * (nx - 1j * ny)], [p * (nx + 1j * ny), 1.0 - p * nz]],
            dtype=complex,
        )


def qubit_density(purity: float, theta: float, phi: float) -> np.ndarray:
    """Density matrix of a qubit state from purity and Bloch angles."""
    return QubitStateSpec.from_angles(purity, theta, phi).density_matrix()


def pure_state(theta: float, phi: float) -> np.ndarray:
    """Ket cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    return np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])


@dataclass(frozen=True)
class PartialSymmetrySpec:
    """Two groups of qubit states, each invariant under a discrete phase rotation.

    Group 1 holds `n1` states at latitude parameter `b` with purity `p` and
    prior `eta`; group 2 holds `n2` states at latitude `c` with purity
    `p_prime` and prior `eta_prime`.  Within each group the azimuthal phases
    are equally spaced; `delta` shifts the second group's phases rigidly.
    Admissible group-2 layouts: two or more states, exactly one state sitting
    at the pole (c = 1), or an empty second group.
    """

    n1: int
    n2: int
    b: float
    c: float
    p: float
    p_prime: float
    eta: float
    eta_prime: float
    delta: float = 0.0

    def __post_init__(self):
        if int(self.n1) != self.n1 or self.n1 < 2:
            raise EnsembleError(f"n1 must be an integer >= 2, got {self.n1!r}")
        if int(self.n2) != self.n2 or self.n2 < 0:
            raise EnsembleError(f"n2 must be a nonnegative integer, got {self.n2!r}")
        if not 0.0 < self.b < self.c <= 1.0:
            raise EnsembleError(
                f"latitude parameters must satisfy 0 < b < c <= 1, got b={self.b!r} c={self.c!r}"
            )
        for label, value in (("p", self.p), ("p_prime", self.p_prime)):
            if not 0.0 <= value <= 1.0:
                raise EnsembleError(f"purity {label}={value!r} outside [0, 1]")
        if self.n2 == 1 and self.c != 1.0:
            raise EnsembleError("a single second-group state requires c = 1")
        if self.eta <= 0.0:
            raise EnsembleError(f"prior eta={self.eta!r} must be positive")
        if self.n2 > 0 and self.eta_prime <= 0.0:
            raise EnsembleError(f"prior eta_prime={self.eta_prime!r} must be positive")
        total = self.n1 * self.eta + self.n2 * self.eta_prime
        if abs(total - 1.0) > _PRIOR_TOL:
            raise EnsembleError(f"priors sum to {total!r}, expected 1")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def case(self) -> str:
        if self.n2 == 0:
            return "single-group"
        if self.n2 == 1:
            return "pole-state"
        return "two-group"

    @property
    def s(self) -> float:
        return self.p * self.b + 0.5 * (1.0 - self.p)

    @property
    def s_prime(self) -> float:
        return self.p_prime * self.c + 0.5 * (1.0 - self.p_prime)

    @property
    def r(self) -> float:
        """<0| rho |0> of the ensemble average in the construction basis."""
        return self.n1 * self.eta * self.s + self.n2 * self.eta_prime * self.s_prime

    def phases(self) -> np.ndarray:
        phi1 = 2.0 * np.pi * np.arange(self.n1) / self.n1
        if self.n2 == 0:
            return phi1
        if self.n2 == 1:
            phi2 = np.array([self.delta])
        else:
            phi2 = self.delta + 2.0 * np.pi * np.arange(self.n2) / self.n2
        return np.concatenate([phi1, phi2])


@dataclass(frozen=True)
class Ensemble:
    """N states with prior probabilities; the discrimination problem instance."""

    dim: int
    priors: tuple[float, ...]
    states: tuple[DensityOperator, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.priors) != len(self.states) or not self.states:
            raise EnsembleError("need one prior per state and at least one state")
        if any(p <= 0.0 or p > 1.0 for p in self.priors):
            raise EnsembleError("priors must lie in (0, 1]")
        total = sum(self.priors)
        if abs(total - 1.0) > _PRIOR_TOL:
            raise EnsembleError(f"priors sum to {total!r}, expected 1")
        for k, state in enumerate(self.states):
            if state.dim != self.dim:
                raise EnsembleError(
                    f"state {k} has dimension {state.dim}, ensemble has {self.dim}"
                )

    @classmethod
    def from_matrices(cls, priors, matrices) -> "Ensemble":
        states = tuple(DensityOperator(np.asarray(m, dtype=complex)) for m in matrices)
        if not states:
            raise EnsembleError("empty ensemble")
        return cls(states[0].dim, tuple(float(p) for p in priors), states)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def weighted(self, j: int) -> np.ndarray:
        """eta_j * rho_j."""
        return self.priors[j] * self.states[j].matrix

    def average_matrix(self) -> np.ndarray:
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for p, state in zip(self.priors, self.states):
            acc += p * state.matrix
        return acc


def average_state(e: Ensemble) -> DensityOperator:
    """The prior-weighted average of the ensemble's states."""
    return DensityOperator(e.average_matrix())


def build_partially_symmetric(spec: PartialSymmetrySpec) -> Ensemble:
    """Construct the two-group phase-symmetric qubit ensemble of `spec`.

    The averaged state comes out diagonal in the computational basis with
    <0|rho|0> equal to `spec.r`.
    """
    phases = spec.phases()
    priors = [spec.eta] * spec.n1 + [spec.eta_prime] * spec.n2
    mats = []
    for j, phi in enumerate(phases):
        if j < spec.n1:
            lat, pur = spec.b, spec.p
        else:
            lat, pur = spec.c, spec.p_prime
        ket = np.array([np.sqrt(lat), np.exp(1j * phi) * np.sqrt(1.0 - lat)])
        mats.append(pur * np.outer(ket, ket.conj()) + 0.5 * (1.0 - pur) * np.eye(2))
    return Ensemble.from_matrices(priors, mats)


def symmetry_check(e: Ensemble, spec: PartialSymmetrySpec, tol: float = 1e-10) -> bool:
    """True iff conjugating each group's first state by the group's phase
    rotation reproduces the remaining group members."""
    if e.dim != 2 or e.n_states != spec.n:
        raise EnsembleError(
            f"ensemble shape ({e.dim}, {e.n_states}) does not match spec ({2}, {spec.n})"
        )

    def _orbit_ok(first: np.ndarray, others, order: int) -> bool:
        u = np.diag([1.0, np.exp(2j * np.pi / order)])
        current = first
        for rho in others:
            current = u @ current @ u.conj().T
            if np.max(np.abs(current - rho)) > tol:
                return False
        return True

    group1 = [e.states[j].matrix for j in range(spec.n1)]
    if not _orbit_ok(group1[0], group1[1:], spec.n1):
        return False
    if spec.n2 >= 2:
        group2 = [e.states[j].matrix for j in range(spec.n1, spec.n)]
        return _orbit_ok(group2[0], group2[1:], spec.n2)
    return True


def uniform_plus_pure(d: int, eta2: float, psi: np.ndarray | None = None) -> Ensemble:
    """Uniformly mixed state (prior 1 - eta2) vs a pure state (prior eta2)."""
    if d < 2:
        raise EnsembleError(f"dimension must be at least 2, got {d}")
    if not 0.0 < eta2 < 1.0:
        raise EnsembleError(f"eta2={eta2!r} outside (0, 1)")
    if psi is None:
        ket = np.zeros(d, dtype=complex)
        ket[0] = 1.0
    else:
        ket = np.asarray(psi, dtype=complex)
        ket = ket / np.linalg.norm(ket)
    return Ensemble.from_matrices(
        [1.0 - eta2, eta2], [np.eye(d) / d, np.outer(ket, ket.conj())]
    )


def match_uniform_plus_pure(e: Ensemble, tol: float = 1e-10):
    """Detect the uniformly-mixed-versus-pure structure.

    Returns (eta2, psi) with the pure state's prior and ket if the ensemble
    is, up to state order, {I/d, |psi><psi|}; otherwise None.
    """
    if e.n_states != 2:
        return None
    d = e.dim
    for mixed, pure in ((0, 1), (1, 0)):
        if np.max(np.abs(e.states[mixed].matrix - np.eye(d) / d)) > tol:
            continue
        dec = eig_hermitian(e.states[pure].matrix)
        if abs(dec.eigenvalues[-1] - 1.0) > tol or np.any(np.abs(dec.eigenvalues[:-1]) > tol):
            continue
        return e.priors[pure], fix_phase(dec.eigenvectors[:, -1])
    return None


def equal_prior_equal_purity(e: Ensemble, tol: float = 1e-10):
    """Common purity if all priors equal 1/N and all purities match, else None."""
    n = e.n_states
    if any(abs(p - 1.0 / n) > tol for p in e.priors):
        return None
    if e.dim != 2:
        return None
    purities = [2.0 * eig_hermitian(s.matrix).eigenvalues[-1] - 1.0 for s in e.states]
    p0 = purities[0]
    if any(abs(p - p0) > tol for p in purities):
        return None
    return float(np.clip(p0, 0.0, 1.0))


# ---------------------------------------------------------------------------
# JSON file format
# ---------------------------------------------------------------------------

_PS_KEYS = {"n1", "n2", "b", "c", "p", "p_prime", "eta", "eta_prime", "delta"}


def matrix_to_json(matrix: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(matrix, dtype=complex)]


def matrix_from_json(data, what: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise EnsembleError(f"{what}: entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise EnsembleError(f"{what}: expected shape d x d x 2, got {arr.shape}")
    return arr[:, :, 0] + 1j * arr[:, :, 1]


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise EnsembleError(f"{where}: unknown keys {sorted(unknown)}")


def ensemble_from_dict(obj: dict):
    """Parse the ensemble file format.

    Two top-level layouts are accepted: a generic {"dim", "states"} object
    whose states carry either an explicit complex "matrix" or the qubit
    shorthand {"purity", "theta", "phi"}, and the partial-symmetry shorthand
    mirroring PartialSymmetrySpec.  Unknown keys are rejected.  Returns
    (ensemble, spec) with spec None for generic input.
    """
    if not isinstance(obj, dict):
        raise EnsembleError("top-level ensemble value must be an object")
    if "n1" in obj or "n2" in obj:
        _reject_unknown(obj, _PS_KEYS, "partial-symmetry ensemble")
        required = {"n1", "n2", "b", "c", "p", "eta"}
        missing = required - set(obj)
        if missing:
            raise EnsembleError(f"partial-symmetry ensemble: missing keys {sorted(missing)}")
        n2 = int(obj["n2"])
        spec = PartialSymmetrySpec(
            n1=int(obj["n1"]),
            n2=n2,
            b=float(obj["b"]),
            c=float(obj["c"]),
            p=float(obj["p"]),
            p_prime=float(obj.get("p_prime", obj["p"])),
            eta=float(obj["eta"]),
            eta_prime=float(obj["eta_prime"]) if n2 > 0 else 0.0,
            delta=float(obj.get("delta", 0.0)),
        )
        return build_partially_symmetric(spec), spec

    _reject_unknown(obj, {"dim", "states"}, "ensemble")
    if "dim" not in obj or "states" not in obj:
        raise EnsembleError("ensemble: required keys are 'dim' and 'states'")
    dim = int(obj["dim"])
    if not isinstance(obj["states"], list) or not obj["states"]:
        raise EnsembleError("ensemble: 'states' must be a non-empty list")
    priors, mats = [], []
    for k, entry in enumerate(obj["states"]):
        where = f"states[{k}]"
        if not isinstance(entry, dict):
            raise EnsembleError(f"{where}: must be an object")
        if "prior" not in entry:
            raise EnsembleError(f"{where}: missing 'prior'")
        priors.append(float(entry["prior"]))
        if "matrix" in entry:
            _reject_unknown(entry, {"prior", "matrix"}, where)
            m = matrix_from_json(entry["matrix"], where)
            if m.shape[0] != dim:
                raise EnsembleError(f"{where}: matrix dimension {m.shape[0]} != dim {dim}")
            mats.append(m)
        else:
            _reject_unknown(entry, {"prior", "purity", "theta", "phi"}, where)
            for key in ("purity", "theta", "phi"):
                if key not in entry:
                    raise EnsembleError(f"{where}: missing '{key}'")
            if dim != 2:
                raise EnsembleError(f"{where}: qubit shorthand requires dim = 2")
            mats.append(
                qubit_density(float(entry["purity"]), float(entry["theta"]), float(entry["phi"]))
            )
    return Ensemble.from_matrices(priors, mats), None


def load_ensemble(path):
    """Read an ensemble JSON file; returns (ensemble, spec_or_None)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EnsembleError(f"{path}: invalid JSON ({exc})") from exc
    return ensemble_from_dict(obj)


def ensemble_to_dict(e: Ensemble) -> dict:
    return {
        "dim": e.dim,
        "states": [
            {"prior": float(p), "matrix": matrix_to_json(s.matrix)}
            for p, s in zip(e.priors, e.states)
        ],
    }
