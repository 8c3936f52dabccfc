"""Seeded property suites over the whole library.

Each suite returns a :class:`SuiteResult` made of named sub-checks with
their pass counts and worst residual (the largest amount by which the
checked inequality was violated, or came closest to being violated).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .inequality import Inequality, chsh, compatibility_neighbors, kcbs
from .majorization import lemma_bound, majorizes, random_doubly_stochastic, state_majorizes
from .measure.catalog import SpectrumCatalog, known_dprime, shipped_catalog
from .measure.seesaw import SeesawOptions, cd_seesaw
from .measure.spectral import (
    cd_spectral,
    cdr_catalog,
    inequality_value,
    lift_tuple,
    prop1_bound,
    t_spectrum,
)
from .operators import (
    ObservableTuple,
    QuantumState,
    check_feasible,
    random_state,
    random_unitary,
)
from .preparation import (
    ProjectiveMeasurement,
    measure,
    outcome_witness,
    povm_decomposition_check,
    prop3_classify,
    prop4_witness,
    random_kraus,
    random_ranks,
    verify_witness,
)


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    total: int = 0
    worst: float = -np.inf

    def record(self, ok: bool, residual: float):
        self.total += 1
        self.passed += bool(ok)
        self.worst = max(self.worst, float(residual))

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total


@dataclass
class SuiteResult:
    name: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str) -> CheckResult:
        c = CheckResult(name)
        self.checks.append(c)
        return c


# -- random inputs -------------------------------------------------------------

def _random_reflection_2(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v /= np.linalg.norm(v)
    return np.eye(2) - 2 * np.outer(v, v.conj())


def random_feasible_tuple(ineq: Inequality, d: int, rng: np.random.Generator,
                          catalog: SpectrumCatalog | None = None) -> ObservableTuple:
    """Random tuple satisfying every context constraint.

    Half of the time (when possible) a lifted catalog tuple under a random
    unitary; otherwise a random block construction in a random basis, where
    each 2x2 block gives non-neighbouring observables independent
    reflections and neighbours of a non-scalar observable a compatible
    (scalar or equal up to sign) block.
    """
    n = ineq.n_observables
    if catalog is not None and rng.random() < 0.5:
        sources = [e for e in catalog.base_entries(ineq) if e.tuple is not None and e.dim <= d]
        if sources:
            e = sources[int(rng.integers(len(sources)))]
            return lift_tuple(e.tuple, ineq, d).conjugated(random_unitary(d, rng))
    neigh = [compatibility_neighbors(ineq, k + 1) for k in range(n)]
    mats = [np.zeros((d, d), dtype=complex) for _ in range(n)]
    i = 0
    while i < d:
        size = 2 if d - i >= 2 and rng.random() < 0.7 else 1
        sl = slice(i, i + size)
        if size == 1:
            for k in range(n):
                mats[k][sl, sl] = rng.choice([1.0, -1.0])
        else:
            blocks: dict[int, np.ndarray | None] = {}
            for k in rng.permutation(n):
                fixed = [blocks[l - 1] for l in neigh[k] if blocks.get(l - 1) is not None]
                s = rng.choice([1.0, -1.0])
                if not fixed:
                    blocks[k] = _random_reflection_2(rng) if rng.random() < 0.8 else None
                    mats[k][sl, sl] = blocks[k] if blocks[k] is not None else s * np.eye(2)
                elif all(np.allclose(f, fixed[0]) or np.allclose(f, -fixed[0]) for f in fixed) \
                        and rng.random() < 0.5:
                    blocks[k] = s * fixed[0]
                    mats[k][sl, sl] = blocks[k]
                else:
                    blocks[k] = None
                    mats[k][sl, sl] = s * np.eye(2)
        i += size
    u = random_unitary(d, rng)
    return ObservableTuple.from_matrices([u @ a @ u.conj().T for a in mats], ineq)


def _random_full_rank_state(d: int, rng: np.random.Generator) -> QuantumState:
    return random_state(d, d, seed=int(rng.integers(2**32)))


def _seed_rng(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng([seed, sum(map(ord, suite))])


_INEQS = [(chsh(), 4), (kcbs(), 3)]


# -- suites --------------------------------------------------------------------

def suite_lemma(seed: int = 0, n: int = 1000) -> SuiteResult:
    rng = _seed_rng(seed, "lemma")
    res = SuiteResult("lemma")
    c = res.add("dot-product bound")
    for _ in range(n):
        k = int(rng.integers(2, 9))
        a = rng.standard_normal(k)
        b = random_doubly_stochastic(k, rng) @ a
        cc = rng.standard_normal(k)
        lhs, rhs = lemma_bound(a, b, cc)
        c.record(majorizes(a, b) and lhs <= rhs + 1e-9, lhs - rhs)
    return res


def suite_schur_horn(seed: int = 0, n: int = 200) -> SuiteResult:
    rng = _seed_rng(seed, "schur-horn")
    res = SuiteResult("schur-horn")
    c = res.add("diagonal majorized by spectrum")
    for _ in range(n):
        d = int(rng.integers(2, 9))
        st = random_state(d, int(rng.integers(1, d + 1)), seed=int(rng.integers(2**32)))
        u = random_unitary(d, rng)
        diag = np.real(np.diag(u.conj().T @ st.matrix @ u))
        gap = np.cumsum(np.sort(diag)[::-1]) - np.cumsum(st.eigenvalues)
        c.record(majorizes(st.eigenvalues, diag), float(np.max(gap)))
    return res


def suite_hlp(seed: int = 0, n: int = 200) -> SuiteResult:
    rng = _seed_rng(seed, "hlp")
    res = SuiteResult("hlp")
    c = res.add("input majorizes unread state")
    for _ in range(n):
        d = int(rng.integers(2, 9))
        st = random_state(d, int(rng.integers(1, d + 1)), seed=int(rng.integers(2**32)))
        meas = ProjectiveMeasurement.random(d, random_ranks(d, d, rng), seed=int(rng.integers(2**32)))
        rep = measure(st, meas)
        gap = np.cumsum(rep.unread_state.eigenvalues) - np.cumsum(st.eigenvalues)
        c.record(state_majorizes(st, rep.unread_state), float(np.max(gap)))
    return res


def suite_prop1(seed: int = 0, n: int = 200) -> SuiteResult:
    rng = _seed_rng(seed, "prop1")
    res = SuiteResult("prop1")
    lip = res.add("Lipschitz bound")
    inv = res.add("unitary invariance")
    cvx = res.add("convexity on commuting mixtures")
    upper = res.add("spectral upper bound")
    for i in range(n):
        ineq, _ = _INEQS[i % 2]
        cat = shipped_catalog(ineq)
        d = int(rng.integers(1, 9))
        s1 = random_state(d, int(rng.integers(1, d + 1)), seed=int(rng.integers(2**32)))
        s2 = random_state(d, int(rng.integers(1, d + 1)), seed=int(rng.integers(2**32)))
        v1 = cd_spectral(s1.eigenvalues, cat, ineq, d)[0]
        v2 = cd_spectral(s2.eigenvalues, cat, ineq, d)[0]
        gap = abs(v1 - v2) - prop1_bound(s1, s2, ineq)
        lip.record(gap <= 1e-9, gap)

        u = random_unitary(d, rng)
        rotated = QuantumState.from_matrix(u @ s1.matrix @ u.conj().T)
        diff = abs(cd_spectral(rotated.eigenvalues, cat, ineq, d)[0] - v1)
        inv.record(diff <= 1e-12, diff)

        k = int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(k))
        spectra = [rng.dirichlet(np.ones(d)) for _ in range(k)]
        mix = sum(pi * lam for pi, lam in zip(p, spectra))  # common eigenbasis
        lhs = cd_spectral(mix, cat, ineq, d)[0]
        rhs = sum(pi * cd_spectral(lam, cat, ineq, d)[0] for pi, lam in zip(p, spectra))
        cvx.record(lhs <= rhs + 1e-9, lhs - rhs)

        tup = random_feasible_tuple(ineq, d, rng, cat)
        val = inequality_value(s1, tup, ineq)
        bound = float(np.dot(t_spectrum(ineq, tup), s1.eigenvalues))
        upper.record(val <= bound + 1e-8, val - bound)
    return res


def suite_prop2(seed: int = 0, n: int = 200) -> SuiteResult:
    rng = _seed_rng(seed, "prop2")
    res = SuiteResult("prop2")
    c = res.add("Schur monotonicity")
    for i in range(n):
        ineq, _ = _INEQS[i % 2]
        cat = shipped_catalog(ineq)
        dp = int(rng.integers(1, 8))
        d = int(rng.integers(dp, 9))
        lam_p = np.sort(rng.dirichlet(np.ones(dp)))[::-1]
        s = rng.random()
        lam = (1 - s) * np.pad(lam_p, (0, d - dp))
        lam[0] += s
        lhs = cd_spectral(lam, cat, ineq, d)[0]
        rhs = cd_spectral(lam_p, cat, ineq, dp)[0]
        c.record(majorizes(lam, lam_p) and lhs >= rhs - 1e-9, rhs - lhs)
    return res


def suite_prop3(seed: int = 0, n: int = 50) -> SuiteResult:
    """Full-rank states at d=5 with CHSH and measurements of rank <= 2."""
    rng = _seed_rng(seed, "prop3")
    ineq = chsh()
    cat = shipped_catalog(ineq)
    res = SuiteResult("prop3")
    cls = res.add("all outcomes guaranteed")
    wit = res.add("certified witness value > 1")
    for _ in range(n):
        st = _random_full_rank_state(5, rng)
        meas = ProjectiveMeasurement.random(5, random_ranks(5, 2, rng), seed=int(rng.integers(2**32)))
        verdict = prop3_classify(st, meas, known_dprime(ineq))
        cls.record(verdict.branch == "all-guaranteed", 0.0)
        for m in measure(st, meas).outcome_set:
            cert = outcome_witness(meas, m, ineq, cat)
            value, bound = verify_witness(st, cert, meas, ineq)
            wit.record(value > 1 and bound > 1, 1 - min(value, bound))
    return res


def suite_prop4(seed: int = 0, n: int = 20) -> SuiteResult:
    """One certificate for a d=6 half-rank measurement, many full-rank states."""
    rng = _seed_rng(seed, "prop4")
    ineq = chsh()
    cat = shipped_catalog(ineq)
    res = SuiteResult("prop4")
    meas = ProjectiveMeasurement.random(6, [3, 3], seed=int(rng.integers(2**32)))
    cert = prop4_witness(meas, ineq, known_dprime(ineq), cat)
    c = res.add("value >= certified bound > 1")
    for _ in range(n):
        st = _random_full_rank_state(6, rng)
        value, bound = verify_witness(st, cert, meas, ineq)
        c.record(value >= bound - 1e-8 and value > 1 and bound > 1, max(bound - value, 1 - value))
    mm = res.add("maximally mixed bound")
    _, bound = verify_witness(QuantumState.maximally_mixed(6), cert, meas, ineq)
    expected = 1 + (np.sqrt(2) - 1) / 3
    mm.record(abs(bound - expected) <= 1e-6, abs(bound - expected))
    both = res.add("both half-rank outcomes violate")
    for m in range(2):
        cm = outcome_witness(meas, m, ineq, cat)
        for _ in range(5):
            st = _random_full_rank_state(6, rng)
            value, _ = verify_witness(st, cm, meas, ineq)
            both.record(value > 1, 1 - value)
    return res


def suite_cor1(seed: int = 0, n: int = 100) -> SuiteResult:
    rng = _seed_rng(seed, "cor1")
    res = SuiteResult("cor1")
    ident = res.add("decomposition identity")
    spec = res.add("unitary equivalence of outcome operators")
    cd = res.add("spectral value bounded by best outcome")
    for i in range(n):
        ineq, _ = _INEQS[i % 2]
        cat = shipped_catalog(ineq)
        d = int(rng.integers(2, 7))
        st = random_state(d, int(rng.integers(1, d + 1)), seed=int(rng.integers(2**32)))
        kr = random_kraus(d, int(rng.integers(1, 5)), seed=int(rng.integers(2**32)))
        rep = povm_decomposition_check(st, kr, ineq, cat)
        ident.record(rep.identity_residual <= 1e-8, rep.identity_residual)
        spec.record(rep.spectrum_residual <= 1e-7, rep.spectrum_residual)
        gap = rep.cd_state - max(rep.cd_outcomes.values())
        cd.record(gap <= 1e-8, gap)
    return res


def suite_seesaw(seed: int = 0, n: int = 50) -> SuiteResult:
    rng = _seed_rng(seed, "seesaw")
    res = SuiteResult("seesaw")
    mono = res.add("per-update monotonicity")
    wit = res.add("witness consistency")
    for i in range(n):
        ineq, dp = _INEQS[i % 2]
        d = int(rng.integers(2, dp + 1))
        st = random_state(d, int(rng.integers(1, d + 1)), seed=int(rng.integers(2**32)))
        drops = [0.0]
        result = cd_seesaw(st, ineq, SeesawOptions(restarts=1, seed=int(rng.integers(2**31))),
                           on_update=lambda r, s, k, before, after: drops.append(before - after))
        worst = max(drops)
        mono.record(worst <= 1e-12, worst)
        feas = check_feasible(ineq, result.witness, 1e-7)
        err = abs(result.value - inequality_value(st, result.witness, ineq))
        wit.record(feas.passed and err <= 1e-9, err)
    return res


def suite_cdr(seed: int = 0, max_dim: int = 8) -> SuiteResult:
    res = SuiteResult("cdr")
    in_r = res.add("nonincreasing in r")
    in_d = res.add("nondecreasing in d")
    for ineq, _ in _INEQS:
        cat = shipped_catalog(ineq)
        table = {(d, r): cdr_catalog(ineq, d, r, cat)
                 for d in range(1, max_dim + 1) for r in range(1, d + 1)}
        for (d, r), v in table.items():
            if r > 1:
                gap = v - table[(d, r - 1)]
                in_r.record(gap <= 1e-9, gap)
            if d > r:
                gap = table[(d - 1, r)] - v
                in_d.record(gap <= 1e-9, gap)
    ineq = chsh()
    cat = shipped_catalog(ineq)
    dp = known_dprime(ineq)
    full = cdr_catalog(ineq, dp, dp, cat)
    lift = res.add("dimension-lift bound")
    for d in (5, 6, 8):
        gap = 1 + (full - 1) * dp / d - cdr_catalog(ineq, d, d, cat)
        lift.record(gap <= 1e-9, gap)
    rank = res.add("low-rank violation")
    t1 = cat.base_entries(ineq)[-1].spectrum[0]
    for d, r in ((5, 2), (6, 3), (8, 5)):
        gap = 1 + (t1 - 1) / r - cdr_catalog(ineq, d, r, cat)
        rank.record(gap <= 1e-9, gap)
    return res


SUITES = {
    "lemma": suite_lemma,
    "schur-horn": suite_schur_horn,
    "hlp": suite_hlp,
    "prop1": suite_prop1,
    "prop2": suite_prop2,
    "prop3": suite_prop3,
    "prop4": suite_prop4,
    "cor1": suite_cor1,
    "seesaw": suite_seesaw,
    "cdr": suite_cdr,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn(seed)
