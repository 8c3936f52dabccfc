"""Von Neumann measurements as state preparations, and violation certificates
for the post-measurement states."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .inequality import Inequality
from .majorization import state_majorizes
from .measure.catalog import SpectrumCatalog
from .measure.spectral import cd_spectral, inequality_value, lift_tuple, t_spectrum
from .operators import (
    ObservableTuple,
    OperatorError,
    QuantumState,
    build_T,
    complete_basis,
    hermitian_eig,
    herm,
    random_unitary,
)

PROJECTOR_TOL = 1e-8
OUTCOME_TOL = 1e-12
SINGLE_OUTCOME_TOL = 1e-9
WITNESS_TOL = 1e-8
VIOLATION_TOL = 1e-9


class PreparationError(ValueError):
    pass


class WitnessError(RuntimeError):
    pass


# -- measurements ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Complete set of orthogonal projectors, each stored by a range basis."""
    dim: int
    bases: tuple[np.ndarray, ...]

    @classmethod
    def from_bases(cls, bases: Sequence, tol: float = PROJECTOR_TOL) -> "ProjectiveMeasurement":
        bases = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in bases]
        if not bases:
            raise PreparationError("measurement needs at least one projector")
        d = bases[0].shape[0]
        for i, b in enumerate(bases):
            if b.shape[0] != d or b.shape[1] < 1:
                raise PreparationError(f"projector {i + 1}: basis has shape {b.shape}, expected ({d}, r>=1)")
        full = np.hstack(bases)
        if full.shape[1] != d:
            raise PreparationError(f"ranks sum to {full.shape[1]}, dimension is {d}")
        err = float(np.max(np.abs(full.conj().T @ full - np.eye(d))))
        if err > tol:
            raise PreparationError(f"range bases are not jointly orthonormal (residual {err:.2e})")
        frozen = []
        for b in bases:
            b = b.copy()
            b.setflags(write=False)
            frozen.append(b)
        return cls(d, tuple(frozen))

    @classmethod
    def from_projectors(cls, projectors: Sequence, tol: float = PROJECTOR_TOL) -> "ProjectiveMeasurement":
        bases = []
        for i, p in enumerate(projectors):
            p = np.asarray(p, dtype=complex)
            if np.max(np.abs(p @ p - p)) > tol or np.max(np.abs(p - p.conj().T)) > tol:
                raise PreparationError(f"matrix {i + 1} is not an orthogonal projector")
            w, v = hermitian_eig(p)
            bases.append(v[:, w > 0.5])
        return cls.from_bases(bases, tol)

    @classmethod
    def random(cls, d: int, ranks: Sequence[int], seed=None) -> "ProjectiveMeasurement":
        if sum(ranks) != d or min(ranks) < 1:
            raise PreparationError(f"ranks {tuple(ranks)} do not partition {d}")
        u = random_unitary(d, np.random.default_rng(seed))
        cuts = np.cumsum([0, *ranks])
        return cls.from_bases([u[:, a:b] for a, b in zip(cuts[:-1], cuts[1:])])

    @classmethod
    def identity(cls, d: int) -> "ProjectiveMeasurement":
        return cls.from_bases([np.eye(d)])

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.bases)

    @property
    def projectors(self) -> list[np.ndarray]:
        return [b @ b.conj().T for b in self.bases]

    def __len__(self):
        return len(self.bases)


def random_ranks(d: int, max_rank: int, rng: np.random.Generator) -> list[int]:
    """Random ordered partition of ``d`` into parts of size at most ``max_rank``."""
    out, left = [], d
    while left:
        r = int(rng.integers(1, min(max_rank, left) + 1))
        out.append(r)
        left -= r
    return out


@dataclass(frozen=True, eq=False)
class KrausSet:
    dim: int
    operators: tuple[np.ndarray, ...]

    @classmethod
    def from_operators(cls, ops: Sequence, tol: float = PROJECTOR_TOL) -> "KrausSet":
        ops = [np.asarray(f, dtype=complex) for f in ops]
        if not ops:
            raise PreparationError("Kraus set is empty")
        d = ops[0].shape[1]
        total = sum(f.conj().T @ f for f in ops)
        err = float(np.max(np.abs(total - np.eye(d))))
        if err > tol:
            raise PreparationError(f"sum of F^dag F differs from identity by {err:.2e}")
        return cls(d, tuple(ops))

    @classmethod
    def projective(cls, meas: ProjectiveMeasurement) -> "KrausSet":
        return cls.from_operators(meas.projectors)

    def __len__(self):
        return len(self.operators)


def random_kraus(d: int, n_ops: int, seed=None) -> KrausSet:
    """Blocks of a random isometry C^d -> C^(n d)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_ops * d, d)) + 1j * rng.standard_normal((n_ops * d, d))
    q, _ = np.linalg.qr(g)
    return KrausSet.from_operators([q[m * d:(m + 1) * d] for m in range(n_ops)])


# -- post-measurement states ------------------------------------------------

@dataclass
class PreparationReport:
    probabilities: np.ndarray
    post_states: list[QuantumState | None]
    unread_state: QuantumState
    outcome_set: tuple[int, ...]
    ranks: tuple[int, ...]
    lower_bounds: dict[int, float] = field(default_factory=dict)
    tags: dict[int, str] = field(default_factory=dict)
    verdict: str | None = None


def _check_dims(state: QuantumState, d: int):
    if state.dim != d:
        raise PreparationError(f"state dimension {state.dim} != measurement dimension {d}")


def measure(state: QuantumState, meas: ProjectiveMeasurement) -> PreparationReport:
    """Outcome probabilities, post-selected states and the unread state.

    Outcome indices are 0-based. The unread state is checked to be
    majorized by the input state.
    """
    _check_dims(state, meas.dim)
    rho = state.require_matrix()
    probs, posts, unread = [], [], np.zeros_like(rho)
    for p_op in meas.projectors:
        block = p_op @ rho @ p_op
        unread += block
        p = float(np.trace(block).real)
        probs.append(p)
        posts.append(QuantumState.from_matrix(herm(block) / p) if p > OUTCOME_TOL else None)
    outcomes = tuple(m for m, p in enumerate(probs) if p > OUTCOME_TOL)
    unread_state = QuantumState.from_matrix(herm(unread))
    if not state_majorizes(state, unread_state):
        raise PreparationError("unread state is not majorized by the input state")
    return PreparationReport(np.array(probs), posts, unread_state, outcomes, meas.ranks)


# -- classification of outcomes ---------------------------------------------

@dataclass
class Prop3Result:
    branch: str  # "all-guaranteed", "at-least-one-guaranteed" or "not-covered"
    tags: dict[int, str]
    qualifying: tuple[int, ...]


def prop3_classify(state: QuantumState, meas: ProjectiveMeasurement, dprime: int) -> Prop3Result:
    """Rank-based guarantee that post-measurement states can violate.

    Outcomes whose state is certified to violate are tagged ``guaranteed``;
    the others in the outcome set are ``unknown``.
    """
    d = meas.dim
    if d < dprime:
        raise PreparationError(f"dimension {d} is below d' = {dprime}")
    rep = measure(state, meas)
    ranks = meas.ranks
    r = max(ranks)
    outcomes = rep.outcome_set
    if r <= d - dprime + 1:
        return Prop3Result("all-guaranteed", {m: "guaranteed" for m in outcomes}, outcomes)
    top = ranks.index(r)
    others = [m for m in outcomes if m != top]
    if d >= 2 * dprime - 3 and others:
        q = others[0]
        tags = {m: ("guaranteed" if m == q else "unknown") for m in outcomes}
        return Prop3Result("at-least-one-guaranteed", tags, (q,))
    return Prop3Result("not-covered", {m: "unknown" for m in outcomes}, ())


# -- witnesses ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WitnessCertificate:
    outcome: int
    tuple: ObservableTuple
    phi: np.ndarray
    t1: float
    source: str = ""


def _witness_source(catalog: SpectrumCatalog, ineq: Inequality, d: int, rank: int):
    best = None
    for e in catalog.base_entries(ineq):
        if e.tuple is None or e.dim > d or e.spectrum[0] <= 1 + VIOLATION_TOL:
            continue
        n_ge_one = int(np.sum(e.spectrum >= 1 - 1e-9)) + (d - e.dim)
        if rank > n_ge_one:
            continue
        if best is None or e.spectrum[0] > best.spectrum[0]:
            best = e
    if best is None:
        raise WitnessError(f"no catalog tuple with top eigenvalue > 1 supports a rank-{rank} outcome at d={d}")
    return best


def outcome_witness(meas: ProjectiveMeasurement, m: int, ineq: Inequality,
                    catalog: SpectrumCatalog, phi=None) -> WitnessCertificate:
    """Tuple whose T has ``phi`` as top eigenvector and all of range(Pi_m)
    in eigenvalue >= 1 eigenspaces.

    A lifted catalog tuple is rotated so that its T-eigenbasis, in
    decreasing order, maps onto ``[phi, rest of range(Pi_m), complement]``.
    ``phi`` defaults to the first stored range vector of ``Pi_m``.
    """
    d = meas.dim
    basis = meas.bases[m]
    rank = basis.shape[1]
    if phi is None:
        phi = basis[:, 0]
    phi = np.asarray(phi, dtype=complex).ravel()
    phi = phi / np.linalg.norm(phi)
    proj = basis @ basis.conj().T
    if np.linalg.norm(proj @ phi - phi) > PROJECTOR_TOL:
        raise WitnessError("phi is not in the range of the chosen projector")
    entry = _witness_source(catalog, ineq, d, rank)
    lifted = lift_tuple(entry.tuple, ineq, d)
    _, v = hermitian_eig(build_T(ineq, lifted))
    # orthonormal basis of range(Pi_m) led by phi, then the complement
    coords = basis.conj().T @ phi
    frame = basis @ complete_basis(coords[:, None], rank)
    target = complete_basis(frame, d)
    u = target @ v.conj().T
    return WitnessCertificate(m, lifted.conjugated(u), phi, float(entry.spectrum[0]), entry.label)


def prop4_witness(meas: ProjectiveMeasurement, ineq: Inequality, dprime: int,
                  catalog: SpectrumCatalog) -> WitnessCertificate:
    """State-independent certificate on the lowest-rank outcome."""
    d = meas.dim
    if len(meas) < 2:
        raise WitnessError("a state-independent witness needs at least two projectors")
    if d < 2 * dprime - 3:
        raise WitnessError(f"dimension {d} is below 2d'-3 = {2 * dprime - 3}")
    ranks = meas.ranks
    m = ranks.index(min(ranks))
    return outcome_witness(meas, m, ineq, catalog)


def verify_witness(state: QuantumState, cert: WitnessCertificate, meas: ProjectiveMeasurement,
                   ineq: Inequality) -> tuple[float, float]:
    """Return ``(Tr[rho_m T(A)], 1 + (t1 - 1) p)``, ``p = <phi|rho|phi> / Tr(Pi_m rho)``."""
    _check_dims(state, meas.dim)
    rho = state.require_matrix()
    p_op = meas.projectors[cert.outcome]
    pm = float(np.trace(p_op @ rho).real)
    if pm <= OUTCOME_TOL:
        raise WitnessError(f"outcome {cert.outcome + 1} has zero probability")
    post = QuantumState.from_matrix(herm(p_op @ rho @ p_op) / pm)
    value = inequality_value(post, cert.tuple, ineq)
    p = float((cert.phi.conj() @ rho @ cert.phi).real) / pm
    bound = 1 + (cert.t1 - 1) * p
    if value < bound - WITNESS_TOL:
        raise WitnessError(f"witness value {value:.10g} is below its certified bound {bound:.10g}")
    return value, bound


def state_adapted_witness(state: QuantumState, meas: ProjectiveMeasurement, m: int,
                          ineq: Inequality, catalog: SpectrumCatalog) -> WitnessCertificate:
    """Outcome witness with ``phi`` the top eigenvector of the post state."""
    rho = state.require_matrix()
    p_op = meas.projectors[m]
    block = herm(p_op @ rho @ p_op)
    _, v = hermitian_eig(block)
    phi = p_op @ v[:, 0]
    if np.linalg.norm(phi) < 0.5:
        phi = meas.bases[m][:, 0]
    return outcome_witness(meas, m, ineq, catalog, phi)


# -- can every outcome be made to violate? --------------------------------

@dataclass
class Corollary2Verdict:
    single_outcome: bool
    cd_status: str  # "violated" or "undetermined"
    verdict: str  # "some-outcome-violates" or "undetermined"
    lower_bounds: dict[int, float]


def outcome_lower_bounds(state: QuantumState, meas: ProjectiveMeasurement, ineq: Inequality,
                         catalog: SpectrumCatalog, dprime: int | None = None) -> dict[int, float]:
    """Certified lower bounds on C_d of every post-measurement state.

    The larger of the catalog spectral value and, where the outcome rank
    allows it, a state-adapted witness bound.
    """
    rep = measure(state, meas)
    d = meas.dim
    out = {}
    for m in rep.outcome_set:
        best = cd_spectral(rep.post_states[m].eigenvalues, catalog, ineq, d)[0]
        try:
            cert = state_adapted_witness(state, meas, m, ineq, catalog)
        except WitnessError:
            pass
        else:
            value, _ = verify_witness(state, cert, meas, ineq)
            best = max(best, value)
        out[m] = best
    return out


def corollary2_check(state: QuantumState, meas: ProjectiveMeasurement, dprime: int,
                     ineq: Inequality, catalog: SpectrumCatalog) -> Corollary2Verdict:
    """Can every post-measurement state be made to violate?

    "Every outcome obeys" can only be refuted by a lower-bound engine, so
    the answer is either a refutation or ``undetermined``.
    """
    d = meas.dim
    if d < 2 * dprime - 3:
        raise PreparationError(f"dimension {d} is below 2d'-3 = {2 * dprime - 3}")
    rep = measure(state, meas)
    single = bool(np.any(rep.probabilities >= 1 - SINGLE_OUTCOME_TOL))
    bounds = outcome_lower_bounds(state, meas, ineq, catalog, dprime)
    violated = any(v > 1 + VIOLATION_TOL for v in bounds.values())
    status = "violated" if violated else "undetermined"
    verdict = "some-outcome-violates" if violated else "undetermined"
    return Corollary2Verdict(single, status, verdict, bounds)


# -- general measurements ------------------------------------------------------

@dataclass
class PovmReport:
    identity_residual: float
    spectrum_residual: float
    outcome_set: tuple[int, ...]
    cd_state: float | None
    cd_outcomes: dict[int, float]

    @property
    def passed(self) -> bool:
        ok = self.identity_residual <= 1e-8 and self.spectrum_residual <= 1e-7
        if self.cd_state is not None and self.cd_outcomes:
            ok = ok and self.cd_state <= max(self.cd_outcomes.values()) + 1e-8
        return ok


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = hermitian_eig(rho)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def povm_decomposition_check(state: QuantumState, kraus: KrausSet, ineq: Inequality | None = None,
                             catalog: SpectrumCatalog | None = None) -> PovmReport:
    """Check ``sum_m sqrt(rho) F_m^dag F_m sqrt(rho) = rho`` and the unitary
    equivalence of ``F_m rho F_m^dag`` with ``sqrt(rho) F_m^dag F_m sqrt(rho)``.

    With a catalog, also compares the spectral value of ``rho`` with the
    best spectral value among the post-measurement states.
    """
    _check_dims(state, kraus.dim)
    rho = state.require_matrix()
    s = _psd_sqrt(rho)
    total = np.zeros_like(rho)
    worst_spec, outcomes, posts = 0.0, [], {}
    for m, f in enumerate(kraus.operators):
        e = s @ f.conj().T @ f @ s
        total += e
        out = f @ rho @ f.conj().T
        p = float(np.trace(out).real)
        if p <= OUTCOME_TOL:
            continue
        outcomes.append(m)
        a = np.linalg.eigvalsh(herm(out))
        b = np.linalg.eigvalsh(herm(e))
        worst_spec = max(worst_spec, float(np.max(np.abs(a - b))))
        posts[m] = np.sort(a / p)[::-1]
    ident = float(np.max(np.abs(total - rho)))
    cd_state, cd_out = None, {}
    if ineq is not None and catalog is not None:
        d = kraus.dim
        cd_state = cd_spectral(state.eigenvalues, catalog, ineq, d)[0]
        cd_out = {m: cd_spectral(np.clip(lam, 0, None), catalog, ineq, d)[0] for m, lam in posts.items()}
    return PovmReport(ident, worst_spec, tuple(outcomes), cd_state, cd_out)


__all__ = [
    "Corollary2Verdict",
    "KrausSet",
    "OperatorError",
    "PovmReport",
    "PreparationError",
    "PreparationReport",
    "Prop3Result",
    "ProjectiveMeasurement",
    "WitnessCertificate",
    "WitnessError",
    "corollary2_check",
    "measure",
    "outcome_lower_bounds",
    "outcome_witness",
    "povm_decomposition_check",
    "prop3_classify",
    "prop4_witness",
    "random_kraus",
    "random_ranks",
    "state_adapted_witness",
    "verify_witness",
]
