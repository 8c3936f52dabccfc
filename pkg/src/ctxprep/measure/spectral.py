"""Spectral evaluation of C_d, the lifting map and the rank-r values C_d^(r)."""
from __future__ import annotations

import math

import numpy as np

from ..inequality import (
    Inequality,
    InequalityError,
    NotNormalizedError,
    classical_value,
    require_normalized,
)
from ..operators import (
    FEASIBILITY_TOL,
    ObservableTuple,
    OperatorError,
    QuantumState,
    build_T,
    eigvalsh_desc,
    projector_state,
    require_feasible,
    spectrum,
)


class EmptyCatalogError(LookupError):
    pass


def inequality_value(state: QuantumState, tup: ObservableTuple, ineq: Inequality,
                     tol: float = FEASIBILITY_TOL) -> float:
    """``Tr[rho T(A)]`` for a feasible tuple."""
    rho = state.require_matrix()
    if tup.dim != state.dim:
        raise OperatorError(f"state has dimension {state.dim}, tuple {tup.dim}")
    val = np.trace(rho @ build_T(ineq, tup, tol))
    if abs(val.imag) > 1e-9:
        raise OperatorError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def lift_spectrum(t, d: int) -> np.ndarray:
    """Append ``d - len(t)`` ones and re-sort decreasingly."""
    t = np.asarray(t, dtype=float).ravel()
    if d < t.size:
        raise ValueError(f"cannot lift a spectrum of length {t.size} to dimension {d}")
    return spectrum(np.concatenate([t, np.ones(d - t.size)]))


def lift_tuple(aprime: ObservableTuple, ineq: Inequality, d: int,
               assignment=None) -> ObservableTuple:
    """Block-diagonal embedding ``A_k = A'_k (+) a_k I_{d-d'}``.

    ``assignment`` must reach classical value 1; by default the
    lexicographically first maximizer is used.
    """
    dp = aprime.dim
    if d < dp:
        raise ValueError(f"target dimension {d} is below source dimension {dp}")
    if assignment is None:
        assignment = require_normalized(ineq)
    elif classical_value(ineq, assignment) != 1:
        raise NotNormalizedError(
            f"assignment {tuple(assignment)} has classical value "
            f"{classical_value(ineq, assignment)}, not 1")
    require_feasible(ineq, aprime)
    mats = []
    for a_k, block in zip(assignment, aprime.observables):
        m = np.zeros((d, d), dtype=complex)
        m[:dp, :dp] = block
        m[dp:, dp:] = a_k * np.eye(d - dp)
        mats.append(m)
    return ObservableTuple.from_matrices(mats, ineq)


def cd_spectral(lam, catalog, ineq: Inequality, d: int | None = None):
    """``max_t t . lambda`` over the catalog spectra for ``(ineq, d)``.

    Both vectors are aligned in decreasing order. Returns ``(value, entry)``;
    ties go to the earlier entry.
    """
    if isinstance(lam, QuantumState):
        lam = lam.eigenvalues
    lam = spectrum(lam)
    if d is None:
        d = lam.size
    if lam.size > d:
        raise ValueError(f"state spectrum has {lam.size} entries, dimension is {d}")
    lam = np.concatenate([lam, np.zeros(d - lam.size)])
    entries = catalog.entries_for(ineq, d)
    if not entries:
        raise EmptyCatalogError(f"no catalog spectra for {ineq.key} at d={d}")
    best_val, best = -math.inf, None
    for e in entries:
        v = float(np.dot(e.spectrum, lam))
        if v > best_val:
            best_val, best = v, e
    return best_val, best


def cdr_catalog(ineq: Inequality, d: int, r: int, catalog) -> float:
    """Catalog part of C_d^(r): ``max_t sum_{i<=r} t_i / r``."""
    if not 1 <= r <= d:
        raise ValueError(f"rank {r} outside 1..{d}")
    lam = np.zeros(d)
    lam[:r] = 1.0 / r
    return cd_spectral(lam, catalog, ineq, d)[0]


def cdr(ineq: Inequality, d: int, r: int, catalog, opts=None) -> float:
    """Certified lower bound on C_d^(r) = C_d(Pi / r).

    The larger of the catalog value and a see-saw run on the projector state
    onto the first r basis vectors.
    """
    from .seesaw import cd_seesaw

    best = cdr_catalog(ineq, d, r, catalog)
    res = cd_seesaw(projector_state(d, r), ineq, opts, catalog=catalog)
    return max(best, res.value)


def prop1_bound(state1: QuantumState, state2: QuantumState, ineq: Inequality,
                d: int | None = None) -> float:
    """Continuity bound ``sqrt(d) sum_n |x_n| Tr[(rho1 - rho2)^2]^(1/2)``."""
    r1, r2 = state1.require_matrix(), state2.require_matrix()
    if state1.dim != state2.dim or (d is not None and d != state1.dim):
        raise OperatorError(f"dimension mismatch {state1.dim} vs {state2.dim}"
                            + ("" if d is None else f" (d={d})"))
    diff = r1 - r2
    hs = math.sqrt(max(0.0, float(np.trace(diff @ diff).real)))
    return math.sqrt(state1.dim) * float(ineq.abs_coefficient_sum) * hs


def t_spectrum(ineq: Inequality, tup: ObservableTuple) -> np.ndarray:
    return eigvalsh_desc(build_T(ineq, tup))


__all__ = [
    "EmptyCatalogError",
    "InequalityError",
    "cd_spectral",
    "cdr",
    "cdr_catalog",
    "inequality_value",
    "lift_spectrum",
    "lift_tuple",
    "prop1_bound",
    "t_spectrum",
]
