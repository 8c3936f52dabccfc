"""Lower bounds on C_d(rho) by alternating maximization over feasible tuples.

Each restart runs three stages:

1. a feasible starting tuple (``init_strategy``);
2. exploration: augmented-Lagrangian ascent of ``Tr[rho T(A)]`` over
   fixed-rank reflections ``A_k = 2 P_k - I``, with a penalty on the
   commutators that the contexts require to vanish, followed by a
   Gauss-Newton restoration of exact commutation;
3. exact see-saw sweeps. Each step replaces one ``A_k`` by the maximizer of
   the (linear) objective over dichotomic operators in the commutant of its
   compatibility neighbours, so the objective never decreases.

Stage 2 exists because single-observable updates are frozen at most
non-degenerate points (e.g. KCBS in dimension 3). Its output is only used
when it passes the feasibility check; otherwise the sweeps start from the
stage-1 tuple.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from ..inequality import Inequality, compatibility_neighbors, require_normalized
from ..operators import (
    FEASIBILITY_TOL,
    ObservableTuple,
    OperatorError,
    QuantumState,
    build_T,
    check_feasible,
    commutant_blocks,
    herm,
    random_unitary,
    sign_operator,
)

INIT_STRATEGIES = ("classical-degenerate", "lifted-catalog", "mixed")


@dataclass(frozen=True)
class SeesawOptions:
    restarts: int = 32
    max_sweeps: int = 500
    improvement_tol: float = 1e-10
    seed: int = 0
    init_strategy: str = "classical-degenerate"
    explore: bool = True

    def __post_init__(self):
        if self.restarts < 1 or self.max_sweeps < 1 or self.improvement_tol <= 0:
            raise ValueError("restarts, max_sweeps and improvement_tol must be positive")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"unknown init strategy {self.init_strategy!r}")


@dataclass(frozen=True)
class CdResult:
    value: float
    witness: ObservableTuple
    sweeps_used: int
    restart_index: int
    converged: bool


def _value(rho: np.ndarray, ineq: Inequality, mats) -> float:
    d = rho.shape[0]
    t = np.zeros((d, d), dtype=complex)
    for coeff, ctx in ineq.terms:
        p = mats[ctx[0] - 1]
        for k in ctx[1:]:
            p = p @ mats[k - 1]
        t += float(coeff) * p
    return float(np.real(np.trace(rho @ t)))


# -- exact see-saw ---------------------------------------------------------

def _coefficient_operator(rho: np.ndarray, ineq: Inequality, mats, k: int) -> np.ndarray:
    """``sum_{n: k in E_n} x_n Herm(rho P_n)`` with ``P_n`` the product of the other members."""
    d = rho.shape[0]
    m = np.zeros((d, d), dtype=complex)
    for coeff, ctx in ineq.terms:
        if k not in ctx:
            continue
        p = np.eye(d, dtype=complex)
        for l in ctx:
            if l != k:
                p = p @ mats[l - 1]
        m += float(coeff) * herm(rho @ p)
    return m


def block_update(rho: np.ndarray, ineq: Inequality, mats, k: int, seed: int = 0,
                 tol: float = 1e-10) -> np.ndarray | None:
    """Best dichotomic ``A_k`` commuting with all compatibility neighbours of ``k``.

    Returns None when the commutant cannot be resolved numerically (nearly
    commuting neighbours) or the candidate fails the commutation check.
    """
    d = rho.shape[0]
    neigh = [mats[l - 1] for l in sorted(compatibility_neighbors(ineq, k))]
    m = _coefficient_operator(rho, ineq, mats, k)
    try:
        blocks = commutant_blocks(neigh, d, seed=seed, tol=tol)
    except (OperatorError, np.linalg.LinAlgError):
        return None
    out = np.zeros((d, d), dtype=complex)
    for block in blocks:
        out += block.expand(sign_operator(block.compress(m)))
    out = herm(out)
    if np.max(np.abs(out @ out - np.eye(d))) > 1e-10:
        return None
    for b in neigh:
        if np.max(np.abs(out @ b - b @ out)) > 1e-10:
            return None
    return out


def seesaw_sweeps(rho: np.ndarray, ineq: Inequality, mats, max_sweeps: int = 500,
                  improvement_tol: float = 1e-10,
                  on_update: Callable[[int, int, float, float], None] | None = None):
    """Run sweeps k = 1..N until a sweep gains less than ``improvement_tol``.

    ``on_update(sweep, k, before, after)`` is called after every single-observable
    update. Returns ``(mats, value, sweeps_used, converged)``.
    """
    mats = [np.array(a, dtype=complex) for a in mats]
    value = _value(rho, ineq, mats)
    for sweep in range(1, max_sweeps + 1):
        start = value
        for k in range(1, ineq.n_observables + 1):
            new = block_update(rho, ineq, mats, k, seed=sweep * 1000 + k)
            after = value
            if new is not None:
                old = mats[k - 1]
                mats[k - 1] = new
                after = _value(rho, ineq, mats)
                if after < value:
                    # rounding in the block decomposition; keep the old operator
                    mats[k - 1] = old
                    after = value
            if on_update is not None:
                on_update(sweep, k, value, after)
            value = after
        if value - start < improvement_tol:
            return mats, value, sweep, True
    return mats, value, max_sweeps, False


# -- exploration -----------------------------------------------------------

def _edges(ineq: Inequality) -> np.ndarray:
    pairs = set()
    for ctx in ineq.contexts:
        for i in ctx:
            for j in ctx:
                if i < j:
                    pairs.add((i - 1, j - 1))
    return np.array(sorted(pairs), dtype=int).reshape(-1, 2)


class _Problem:
    """Augmented Lagrangian of -Tr[rho T(A)] with commutator constraints."""

    def __init__(self, rho: np.ndarray, ineq: Inequality, ranks: list[int]):
        self.rho = rho
        self.d = rho.shape[0]
        self.ineq = ineq
        self.ranks = ranks
        self.edges = _edges(ineq)
        self.terms = [(float(c), [k - 1 for k in ctx]) for c, ctx in ineq.terms]
        self.sizes = [self.d * r for r in ranks]
        self.mu = 1.0
        self.lam = np.zeros((len(self.edges), self.d, self.d), dtype=complex)
        self.uniform = len(set(ranks)) == 1

    def unpack(self, x: np.ndarray) -> list[np.ndarray]:
        out, i = [], 0
        for r, n in zip(self.ranks, self.sizes):
            out.append((x[i:i + n] + 1j * x[i + n:i + 2 * n]).reshape(self.d, r))
            i += 2 * n
        return out

    @staticmethod
    def pack(ys) -> np.ndarray:
        return np.concatenate([np.concatenate([y.real.ravel(), y.imag.ravel()]) for y in ys])

    def reflections(self, ys):
        eye = np.eye(self.d)
        mats, projs, grams = [], [], []
        for y in ys:
            g = np.linalg.inv(y.conj().T @ y)
            p = y @ g @ y.conj().T
            mats.append(2 * p - eye)
            projs.append(p)
            grams.append(g)
        return mats, projs, grams

    def objective_grads(self, mats):
        d, rho = self.d, self.rho
        grads = [np.zeros((d, d), dtype=complex) for _ in mats]
        f = 0.0
        eye = np.eye(d, dtype=complex)
        for c, ks in self.terms:
            pre = [eye]
            for k in ks:
                pre.append(pre[-1] @ mats[k])
            suf = [eye]
            for k in reversed(ks):
                suf.append(mats[k] @ suf[-1])
            suf.reverse()
            f += c * np.trace(rho @ pre[-1]).real
            for j, k in enumerate(ks):
                grads[k] += c * herm(suf[j + 1] @ rho @ pre[j])
        return f, grads

    def commutators(self, mats) -> np.ndarray:
        a = np.stack(mats)
        ak, al = a[self.edges[:, 0]], a[self.edges[:, 1]]
        return ak @ al - al @ ak

    def __call__(self, x: np.ndarray):
        if self.uniform:
            return self._call_stacked(x)
        ys = self.unpack(x)
        mats, projs, grams = self.reflections(ys)
        f, g = self.objective_grads(mats)
        val = -f
        w = [-gi for gi in g]
        if len(self.edges):
            c = self.commutators(mats)
            val += float(np.sum((self.lam.conj() * c).real)) + self.mu / 2 * float(np.sum(np.abs(c) ** 2))
            eff = (self.lam + self.mu * c).conj().transpose(0, 2, 1)
            for e, (k, l) in enumerate(self.edges):
                w[k] += herm(mats[l] @ eff[e] - eff[e] @ mats[l])
                w[l] += herm(eff[e] @ mats[k] - mats[k] @ eff[e])
        eye = np.eye(self.d)
        gy = [2 * (eye - p) @ (2 * wi) @ y @ gm for y, p, gm, wi in zip(ys, projs, grams, w)]
        return val, self.pack(gy)

    def _call_stacked(self, x: np.ndarray):
        # Same as the generic path, batched over observables of equal rank.
        n, d, r = len(self.ranks), self.d, self.ranks[0]
        xr = x.reshape(n, 2, d, r)
        y = xr[:, 0] + 1j * xr[:, 1]
        yh = y.conj().transpose(0, 2, 1)
        gm = np.linalg.inv(yh @ y)
        p = y @ gm @ yh
        eye = np.eye(d)
        a = 2 * p - eye
        f, g = self.objective_grads(list(a))
        val = -f
        w = -np.stack(g)
        if len(self.edges):
            ek, el = self.edges[:, 0], self.edges[:, 1]
            ak, al = a[ek], a[el]
            c = ak @ al - al @ ak
            val += float(np.sum((self.lam.conj() * c).real)) + self.mu / 2 * float(np.sum(np.abs(c) ** 2))
            eff = (self.lam + self.mu * c).conj().transpose(0, 2, 1)
            gk = al @ eff - eff @ al
            gl = eff @ ak - ak @ eff
            np.add.at(w, ek, (gk + gk.conj().transpose(0, 2, 1)) / 2)
            np.add.at(w, el, (gl + gl.conj().transpose(0, 2, 1)) / 2)
        gy = 4 * (eye - p) @ w @ y @ gm
        out = np.stack([gy.real, gy.imag], axis=1)
        return val, out.ravel()

def _orthonormal_reflections(ys) -> list[np.ndarray]:
    out = []
    for y in ys:
        q, _ = np.linalg.qr(y)
        out.append(2 * q @ q.conj().T - np.eye(y.shape[0]))
    return out


def restore_commutation(ineq: Inequality, mats, iters: int = 8, target: float = 1e-13):
    """Gauss-Newton on unitary conjugations ``A_k -> e^{iH_k} A_k e^{-iH_k}``.

    Dichotomy is preserved exactly; only the context commutators are driven
    to zero. Returns the new matrices and the final max commutator residual.
    """
    mats = [herm(np.array(a, dtype=complex)) for a in mats]
    edges = _edges(ineq)
    if not len(edges):
        return mats, 0.0
    d = mats[0].shape[0]
    n = len(mats)
    basis = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            if i == j:
                e[i, i] = 1
            elif i < j:
                e[i, j] = e[j, i] = 1 / np.sqrt(2)
            else:
                e[i, j], e[j, i] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            basis.append(e)

    def residual(ms):
        a = np.stack(ms)
        return a[edges[:, 0]] @ a[edges[:, 1]] - a[edges[:, 1]] @ a[edges[:, 0]]

    res = residual(mats)
    worst = float(np.max(np.abs(res)))
    for _ in range(iters):
        if worst <= target:
            break
        cols = []
        for k in range(n):
            for e in basis:
                da = 1j * (e @ mats[k] - mats[k] @ e)
                dc = np.zeros_like(res)
                for idx, (p, q) in enumerate(edges):
                    if p == k:
                        dc[idx] += da @ mats[q] - mats[q] @ da
                    elif q == k:
                        dc[idx] += mats[p] @ da - da @ mats[p]
                cols.append(np.concatenate([dc.real.ravel(), dc.imag.ravel()]))
        jac = np.array(cols).T
        rhs = -np.concatenate([res.real.ravel(), res.imag.ravel()])
        step, *_ = np.linalg.lstsq(jac, rhs, rcond=1e-10)
        new = []
        for k in range(n):
            h = sum(step[k * d * d + i] * basis[i] for i in range(d * d))
            u = expm(1j * h)
            new.append(herm(u @ mats[k] @ u.conj().T))
        new_res = residual(new)
        new_worst = float(np.max(np.abs(new_res)))
        if new_worst >= worst:
            break
        mats, res, worst = new, new_res, new_worst
    return mats, worst


def explore(rho: np.ndarray, ineq: Inequality, start_mats, rng: np.random.Generator,
            noise: float = 1.0, mu0: float = 0.1, growth: float = 2.0,
            mu_max: float = 1e3, stages: int = 14):
    """Penalty-continuation ascent from (a perturbation of) ``start_mats``.

    Returns ``(mats, residual)``; the caller decides whether it is feasible.
    """
    d = rho.shape[0]
    ys, ranks = [], []
    for a in start_mats:
        w, v = np.linalg.eigh(herm(a))
        plus = v[:, w > 0]
        if plus.shape[1] in (0, d):
            plus = v[:, -max(1, (d + 1) // 2):]
        ranks.append(plus.shape[1])
        ys.append(plus + noise * (rng.standard_normal(plus.shape)
                                  + 1j * rng.standard_normal(plus.shape)))
    prob = _Problem(rho, ineq, ranks)
    prob.mu = mu0
    x = prob.pack(ys)
    worst = np.inf
    for stage in range(stages):
        gtol = 1e-6 if prob.mu < mu_max else 1e-10
        r = minimize(prob, x, jac=True, method="L-BFGS-B",
                     options=dict(maxiter=150, gtol=gtol, ftol=1e-15))
        x = r.x
        mats = _orthonormal_reflections(prob.unpack(x))
        if len(prob.edges):
            c = prob.commutators(mats)
            worst = float(np.max(np.abs(c)))
            prob.lam = prob.lam + prob.mu * c
        else:
            worst = 0.0
        if worst < 1e-8:
            break
        prob.mu = min(prob.mu * growth, mu_max)
    mats = _orthonormal_reflections(prob.unpack(x))
    return restore_commutation(ineq, mats)


# -- initialisation and driver ---------------------------------------------

def classical_degenerate_start(ineq: Inequality, d: int, rng: np.random.Generator,
                               signs=None) -> list[np.ndarray]:
    """``A_k = s_k U D U^dag`` with ``D`` a balanced diagonal sign matrix.

    All observables share the eigenspaces of ``D`` (dimensions ceil(d/2) and
    floor(d/2)), so the tuple is feasible and every joint eigenspace stays
    degenerate for d >= 4.
    """
    if signs is None:
        signs = rng.choice([1, -1], size=ineq.n_observables)
    diag = np.array([1.0] * ((d + 1) // 2) + [-1.0] * (d // 2))
    u = random_unitary(d, rng)
    base = herm((u * diag[None, :]) @ u.conj().T)
    return [s * base for s in signs]


# Uniform signs work far better than mixed ones as exploration seeds; a
# smaller initial penalty helps KCBS-like cycles, a larger one CHSH-like
# bipartite structures, so restarts alternate between the two.
_MU0_SCHEDULE = (0.1, 0.03)
_GROWTH = 2.0


def _restart_signs(ineq: Inequality, r: int, rng: np.random.Generator):
    sign = 1 if r % 2 == 0 else -1
    return sign * np.ones(ineq.n_observables, dtype=int)


def initial_tuple(ineq: Inequality, d: int, strategy: str, restart: int,
                  rng: np.random.Generator, catalog=None) -> list[np.ndarray]:
    if strategy == "mixed":
        strategy = "classical-degenerate" if restart % 2 == 0 else "lifted-catalog"
    if strategy == "lifted-catalog" and catalog is not None:
        from .spectral import lift_tuple
        sources = [e for e in catalog.base_entries(ineq) if e.tuple is not None and e.dim <= d]
        if sources:
            entry = sources[restart % len(sources)]
            lifted = lift_tuple(entry.tuple, ineq, d)
            u = random_unitary(d, rng)
            return list(lifted.conjugated(u).observables)
    return classical_degenerate_start(ineq, d, rng, _restart_signs(ineq, restart, rng))


def _single_restart(rho, ineq, d, opts, r, catalog, on_update):
    rng = np.random.default_rng([opts.seed, r])
    start = initial_tuple(ineq, d, opts.init_strategy, r, rng, catalog)
    mats = start
    if opts.explore and ineq.n_observables > 0 and d > 1:
        mu0 = _MU0_SCHEDULE[(r // 2) % len(_MU0_SCHEDULE)]
        cand, worst = explore(rho, ineq, start, rng, mu0=mu0, growth=_GROWTH)
        tup = ObservableTuple.from_matrices(cand, ineq)
        if worst <= 1e-10 and check_feasible(ineq, tup, 1e-9).passed:
            if _value(rho, ineq, cand) >= _value(rho, ineq, start):
                mats = cand
    hook = None if on_update is None else (lambda *a: on_update(r, *a))
    mats, value, sweeps, converged = seesaw_sweeps(
        rho, ineq, mats, opts.max_sweeps, opts.improvement_tol, hook)
    return mats, value, sweeps, converged


def cd_seesaw(state: QuantumState, ineq: Inequality, opts: SeesawOptions | None = None,
              catalog=None, on_update=None) -> CdResult:
    """Certified lower bound on C_d(rho): the best restart's feasible witness.

    ``on_update(restart, sweep, k, before, after)`` observes every see-saw step.
    """
    opts = opts or SeesawOptions()
    rho = state.require_matrix()
    d = state.dim
    if d < 1:
        raise OperatorError("dimension must be positive")
    require_normalized(ineq)
    best = None
    for r in range(opts.restarts):
        mats, _, sweeps, converged = _single_restart(rho, ineq, d, opts, r, catalog, on_update)
        tup = ObservableTuple.from_matrices(mats, ineq)
        if not check_feasible(ineq, tup, FEASIBILITY_TOL).passed:
            continue
        value = float(np.real(np.trace(rho @ build_T(ineq, tup))))
        if best is None or value > best.value:
            best = CdResult(value, tup, sweeps, r, converged)
    if best is None:
        raise RuntimeError("no restart produced a feasible witness")
    return best
