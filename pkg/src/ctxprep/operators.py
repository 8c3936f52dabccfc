"""Dense complex Hermitian matrices, dichotomic observable tuples and states."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .inequality import Inequality, compatibility_neighbors

HERMITIAN_TOL = 1e-10
FEASIBILITY_TOL = 1e-8
GROUPING_TOL = 1e-8
MAX_DIM = 64


class OperatorError(ValueError):
    pass


class EigenDecompositionError(RuntimeError):
    pass


class InfeasibleTupleError(OperatorError):
    pass


def hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square matrix as Hermitian and return its symmetrized copy."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise OperatorError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise OperatorError(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise OperatorError("matrix has non-finite entries")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise OperatorError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    return (m + m.conj().T) / 2


def herm(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2


def spectrum(values) -> np.ndarray:
    """Real vector sorted in decreasing order."""
    v = np.asarray(values, dtype=float).ravel()
    return np.sort(v)[::-1].copy()


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in decreasing order and the matching orthonormal eigenvectors."""
    m = hermitian(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvalsh_desc(m: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(herm(np.asarray(m, dtype=complex)))[::-1].copy()


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return herm(z)


def complete_basis(vectors: np.ndarray, d: int) -> np.ndarray:
    """Orthonormal d x d matrix whose leading columns are the given orthonormal columns."""
    vectors = np.asarray(vectors, dtype=complex).reshape(d, -1)
    k = vectors.shape[1]
    if k == d:
        return vectors.copy()
    proj = np.eye(d) - vectors @ vectors.conj().T
    u, s, _ = np.linalg.svd(proj)
    return np.hstack([vectors, u[:, : d - k]])


# -- states ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix, or just its spectrum when no matrix is known."""

    dim: int
    matrix: np.ndarray | None
    eigenvalues: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, rho, tol: float = HERMITIAN_TOL) -> "QuantumState":
        rho = hermitian(rho, tol=max(tol, HERMITIAN_TOL))
        tr = np.trace(rho).real
        if abs(tr - 1) > tol:
            raise OperatorError(f"state trace is {tr!r}, expected 1")
        lam = eigvalsh_desc(rho)
        if lam[-1] < -tol:
            raise OperatorError(f"state has negative eigenvalue {lam[-1]:.3g}")
        rho.setflags(write=False)
        return cls(rho.shape[0], rho, lam)

    @classmethod
    def from_spectrum(cls, values, tol: float = HERMITIAN_TOL) -> "QuantumState":
        raw = np.asarray(values, dtype=float).ravel()
        if raw.size < 1:
            raise OperatorError("empty spectrum")
        if np.any(np.diff(raw) > tol):
            raise OperatorError("spectrum must be sorted in decreasing order")
        if raw[-1] < -tol:
            raise OperatorError("spectrum has a negative entry")
        if abs(raw.sum() - 1) > tol:
            raise OperatorError(f"spectrum sums to {raw.sum()!r}, expected 1")
        lam = spectrum(raw)
        return cls(lam.size, None, lam)

    @classmethod
    def pure(cls, psi) -> "QuantumState":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls.from_matrix(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "QuantumState":
        return cls.from_matrix(np.eye(d) / d)

    @property
    def has_matrix(self) -> bool:
        return self.matrix is not None

    def require_matrix(self) -> np.ndarray:
        if self.matrix is None:
            raise OperatorError("operation needs a density matrix, state is spectrum-only")
        return self.matrix

    @property
    def rank(self) -> int:
        return int(np.sum(self.eigenvalues > 1e-12))


def random_state(d: int, rank: int | None = None, seed=None) -> QuantumState:
    """``G G^dag / Tr`` for a complex Gaussian ``d x rank`` matrix ``G``."""
    rank = d if rank is None else rank
    if d < 1 or not 1 <= rank <= d:
        raise OperatorError(f"invalid rank {rank} for dimension {d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return QuantumState.from_matrix(rho)


def projector_state(d: int, r: int) -> QuantumState:
    """Normalized projector onto the first r canonical basis vectors."""
    if not 1 <= r <= d:
        raise OperatorError(f"invalid rank {r} for dimension {d}")
    diag = np.zeros(d)
    diag[:r] = 1.0 / r
    return QuantumState.from_matrix(np.diag(diag).astype(complex))


# -- observable tuples -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObservableTuple:
    dim: int
    observables: tuple[np.ndarray, ...]
    ineq_key: str | None = None

    @classmethod
    def from_matrices(cls, mats: Sequence, ineq: Inequality | None = None) -> "ObservableTuple":
        obs = tuple(hermitian(m) for m in mats)
        if not obs:
            raise OperatorError("empty observable tuple")
        d = obs[0].shape[0]
        if any(a.shape != (d, d) for a in obs):
            raise OperatorError("observables have mismatched dimensions")
        if ineq is not None and len(obs) != ineq.n_observables:
            raise OperatorError(
                f"{len(obs)} observables given, inequality has {ineq.n_observables}")
        for a in obs:
            a.setflags(write=False)
        return cls(d, obs, None if ineq is None else ineq.key)

    def __len__(self):
        return len(self.observables)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.observables[k]

    def conjugated(self, u: np.ndarray) -> "ObservableTuple":
        return ObservableTuple(self.dim, tuple(_frozen(herm(u @ a @ u.conj().T))
                                               for a in self.observables), self.ineq_key)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def classical_tuple(a: Sequence[int], d: int, ineq: Inequality | None = None) -> ObservableTuple:
    """The tuple ``A_k = a_k I_d``."""
    return ObservableTuple.from_matrices([s * np.eye(d, dtype=complex) for s in a], ineq)


@dataclass(frozen=True)
class FeasibilityReport:
    dichotomy_residual: float
    commutator_residual: float
    worst_observable: int
    worst_pair: tuple[int, int] | None
    tol: float

    @property
    def passed(self) -> bool:
        return self.dichotomy_residual <= self.tol and self.commutator_residual <= self.tol


def check_feasible(ineq: Inequality, tup: ObservableTuple,
                   tol: float = FEASIBILITY_TOL) -> FeasibilityReport:
    if len(tup) != ineq.n_observables:
        raise OperatorError(
            f"tuple has {len(tup)} observables, inequality has {ineq.n_observables}")
    eye = np.eye(tup.dim)
    dich = [np.max(np.abs(a @ a - eye)) for a in tup.observables]
    worst_k = int(np.argmax(dich)) + 1
    comm, pair = 0.0, None
    for k in range(1, ineq.n_observables + 1):
        for l in sorted(compatibility_neighbors(ineq, k)):
            if l <= k:
                continue
            a, b = tup[k - 1], tup[l - 1]
            r = float(np.max(np.abs(a @ b - b @ a)))
            if pair is None or r > comm:
                comm, pair = r, (k, l)
    return FeasibilityReport(float(max(dich)), comm, worst_k, pair, tol)


def require_feasible(ineq: Inequality, tup: ObservableTuple, tol: float = FEASIBILITY_TOL):
    rep = check_feasible(ineq, tup, tol)
    if not rep.passed:
        raise InfeasibleTupleError(
            f"tuple infeasible: dichotomy residual {rep.dichotomy_residual:.3g}, "
            f"commutator residual {rep.commutator_residual:.3g} (tol {tol:g})")
    return rep


def context_product(tup: ObservableTuple, ctx: Sequence[int]) -> np.ndarray:
    out = np.eye(tup.dim, dtype=complex)
    for k in ctx:
        out = out @ tup[k - 1]
    return out


def build_T(ineq: Inequality, tup: ObservableTuple, tol: float = FEASIBILITY_TOL) -> np.ndarray:
    """``T(A) = sum_n x_n prod_{k in E_n} A_k``, symmetrized."""
    require_feasible(ineq, tup, tol)
    t = np.zeros((tup.dim, tup.dim), dtype=complex)
    for coeff, ctx in ineq.terms:
        t += float(coeff) * context_product(tup, ctx)
    return herm(t)


# -- simultaneous structure ------------------------------------------------

def _group_eigs(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Index groups of an ascending eigenvalue array, split at gaps > tol."""
    groups, cur = [], [0]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > tol:
            groups.append(np.array(cur))
            cur = []
        cur.append(i)
    groups.append(np.array(cur))
    return groups


def joint_eigenspaces(ops: Sequence[np.ndarray], d: int | None = None,
                      tol: float = GROUPING_TOL) -> list[np.ndarray]:
    """Orthonormal bases (d x m blocks) of the common eigenspaces of commuting operators.

    Recursive refinement: diagonalize the first operator, split its eigenvalues
    into groups, and recurse on the compressions of the rest to each group.
    """
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if d is None:
        if not ops:
            raise OperatorError("dimension required for an empty operator list")
        d = ops[0].shape[0]
    for i, a in enumerate(ops):
        for b in ops[i + 1:]:
            r = np.max(np.abs(a @ b - b @ a))
            if r > tol:
                raise OperatorError(f"operators do not commute (residual {r:.3g})")

    def refine(basis: np.ndarray, rest: list[np.ndarray]) -> list[np.ndarray]:
        if not rest or basis.shape[1] == 1:
            return [basis]
        comp = herm(basis.conj().T @ rest[0] @ basis)
        w, v = np.linalg.eigh(comp)
        out = []
        for g in reversed(_group_eigs(w, tol)):
            out.extend(refine(basis @ v[:, g], rest[1:]))
        return out

    return refine(np.eye(d, dtype=complex), ops)


@dataclass
class CommutantBlock:
    """One simple summand ``I_mult (x) M_size`` of a commutant algebra.

    ``frames[i]`` is a ``d x mult`` isometry; the commutant acts on the span
    of ``frames`` as ``sum_ij X[i, j] frames[i] frames[j]^dag``.
    """

    frames: list[np.ndarray]

    @property
    def size(self) -> int:
        return len(self.frames)

    @property
    def mult(self) -> int:
        return self.frames[0].shape[1]

    def compress(self, m: np.ndarray) -> np.ndarray:
        n = self.size
        out = np.empty((n, n), dtype=complex)
        for i, fi in enumerate(self.frames):
            for j, fj in enumerate(self.frames):
                out[i, j] = np.trace(fi.conj().T @ m @ fj)
        return out

    def expand(self, x: np.ndarray) -> np.ndarray:
        d = self.frames[0].shape[0]
        out = np.zeros((d, d), dtype=complex)
        for i, fi in enumerate(self.frames):
            for j, fj in enumerate(self.frames):
                if x[i, j] != 0:
                    out += x[i, j] * fi @ fj.conj().T
        return out


def _null_space(mat: np.ndarray, rtol: float) -> np.ndarray:
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(mat)
    scale = max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def commutant_basis(ops: Sequence[np.ndarray], d: int, tol: float = GROUPING_TOL) -> np.ndarray:
    """Columns are vec(X) for a basis of {X : [X, S] = 0 for S in ops}."""
    eye = np.eye(d)
    rows = []
    for s in ops:
        s = np.asarray(s, dtype=complex)
        # row-major vec: vec(S X - X S) = (S (x) I - I (x) S^T) vec(X)
        rows.append(np.kron(s, eye) - np.kron(eye, s.T))
    mat = np.vstack(rows) if rows else np.zeros((0, d * d), dtype=complex)
    return _null_space(mat, tol)


def commutant_blocks(ops: Sequence[np.ndarray], d: int, seed: int = 0,
                     tol: float = GROUPING_TOL) -> list[CommutantBlock]:
    """Wedderburn decomposition of the commutant of ``ops``.

    The operators need not commute with each other. For commuting input each
    block is one joint eigenspace, with ``mult = 1`` and ``size`` equal to its
    dimension.
    """
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if all(np.max(np.abs(o - o[0, 0] * np.eye(d))) <= tol for o in ops):
        return [CommutantBlock([np.eye(d, dtype=complex)[:, [i]] for i in range(d)])]
    basis = commutant_basis(ops, d, tol)
    mats = [basis[:, j].reshape(d, d) for j in range(basis.shape[1])]
    herm_basis = []
    for x in mats:
        for h in (herm(x), herm(1j * x)):
            if np.linalg.norm(h) > 1e-12:
                herm_basis.append(h)
    rng = np.random.default_rng(seed)

    def random_element(pool):
        c = rng.standard_normal(len(pool))
        return sum(ci * h for ci, h in zip(c, pool))

    # centre = commutant elements that commute with the whole commutant
    centre = commutant_basis(ops + mats, d, tol)
    centre_h = []
    for j in range(centre.shape[1]):
        x = centre[:, j].reshape(d, d)
        for h in (herm(x), herm(1j * x)):
            if np.linalg.norm(h) > 1e-12:
                centre_h.append(h)
    z = random_element(centre_h) if centre_h else np.eye(d)
    wz, vz = np.linalg.eigh(herm(z))
    blocks = []
    for g in _group_eigs(wz, 1e-6):
        sub = vz[:, g]
        y = herm(sub.conj().T @ random_element(herm_basis) @ sub)
        wy, vy = np.linalg.eigh(y)
        groups = _group_eigs(wy, 1e-6)
        eig_frames = [sub @ vy[:, h] for h in groups]
        mult = eig_frames[0].shape[1]
        if any(f.shape[1] != mult for f in eig_frames):
            raise OperatorError("commutant decomposition failed: unequal multiplicities")
        if len(eig_frames) == 1:
            blocks.append(CommutantBlock(eig_frames))
            continue
        link = random_element(herm_basis)
        frames = [eig_frames[0]]
        for f in eig_frames[1:]:
            k = f.conj().T @ link @ eig_frames[0]
            nrm = np.sqrt(np.trace(k.conj().T @ k).real / mult)
            if nrm < 1e-8:
                raise OperatorError("commutant decomposition failed: degenerate link")
            frames.append(f @ (k / nrm))
        blocks.append(CommutantBlock(frames))
    return blocks


def sign_operator(m: np.ndarray, tie_tol: float = 1e-12) -> np.ndarray:
    """Dichotomic maximizer of Tr[A m]: +1 on nonnegative eigendirections."""
    w, v = np.linalg.eigh(herm(m))
    s = np.where(w >= -tie_tol, 1.0, -1.0)
    return (v * s[None, :]) @ v.conj().T
