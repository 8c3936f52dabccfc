"""Finite under-approximations of the set of achievable T-spectra."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..inequality import Inequality, chsh, kcbs, require_normalized
from ..operators import ObservableTuple, classical_tuple, require_feasible, spectrum
from .spectral import lift_spectrum, t_spectrum

SPECTRUM_MATCH_TOL = 1e-7


class CatalogError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    label: str
    ineq_key: str
    dim: int
    spectrum: np.ndarray
    tuple: ObservableTuple | None = field(default=None, repr=False)

    def lifted(self, d: int) -> "CatalogEntry":
        if d == self.dim:
            return self
        return CatalogEntry(f"{self.label}^{d}", self.ineq_key, d,
                            lift_spectrum(self.spectrum, d), None)


class SpectrumCatalog:
    """Ordered list of spectra; lookups at dimension d also return lifts of
    every lower-dimensional entry, so the catalog is closed under lifting."""

    def __init__(self, entries=()):
        self.entries: list[CatalogEntry] = []
        for e in entries:
            self.add(e)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def add(self, entry: CatalogEntry, ineq: Inequality | None = None) -> CatalogEntry:
        t = spectrum(entry.spectrum)
        if t.size != entry.dim:
            raise CatalogError(f"entry {entry.label}: spectrum length {t.size} != dim {entry.dim}")
        if ineq is not None:
            if ineq.key != entry.ineq_key:
                raise CatalogError(f"entry {entry.label} belongs to {entry.ineq_key}")
            bound = float(ineq.abs_coefficient_sum)
            if np.any(np.abs(t) > bound + 1e-7):
                raise CatalogError(f"entry {entry.label}: eigenvalue exceeds sum |x_n| = {bound}")
            if entry.tuple is not None:
                require_feasible(ineq, entry.tuple)
                got = t_spectrum(ineq, entry.tuple)
                if np.max(np.abs(got - t)) > SPECTRUM_MATCH_TOL:
                    raise CatalogError(f"entry {entry.label}: stored spectrum does not match its tuple")
        entry = CatalogEntry(entry.label, entry.ineq_key, entry.dim, t, entry.tuple)
        self.entries.append(entry)
        return entry

    def add_tuple(self, label: str, ineq: Inequality, tup: ObservableTuple) -> CatalogEntry:
        return self.add(CatalogEntry(label, ineq.key, tup.dim, t_spectrum(ineq, tup), tup), ineq)

    def base_entries(self, ineq: Inequality) -> list[CatalogEntry]:
        return [e for e in self.entries if e.ineq_key == ineq.key]

    def entries_for(self, ineq: Inequality, d: int) -> list[CatalogEntry]:
        return [e.lifted(d) for e in self.base_entries(ineq) if e.dim <= d]

    def merged(self, other: "SpectrumCatalog") -> "SpectrumCatalog":
        out = SpectrumCatalog()
        out.entries = list(self.entries) + list(other.entries)
        return out


# -- shipped entries -------------------------------------------------------

def tsirelson_tuple() -> ObservableTuple:
    """Two-qubit CHSH optimum: Alice (A1, A2) on the first factor, Bob on the second."""
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    i2 = np.eye(2)
    b1, b2 = (z + x) / np.sqrt(2), (z - x) / np.sqrt(2)
    return ObservableTuple.from_matrices(
        [np.kron(z, i2), np.kron(x, i2), np.kron(i2, b1), np.kron(i2, b2)], chsh())


def kcbs_pentagram_tuple() -> ObservableTuple:
    """``A_j = I - 2 v_j v_j^T`` with the five pentagram vectors in R^3."""
    cos2 = 1 / np.sqrt(5)
    c, s = np.sqrt(cos2), np.sqrt(1 - cos2)
    mats = []
    for j in range(5):
        phi = 4 * np.pi * j / 5
        v = np.array([c, s * np.cos(phi), s * np.sin(phi)])
        mats.append(np.eye(3) - 2 * np.outer(v, v))
    return ObservableTuple.from_matrices(mats, kcbs())


KNOWN_DPRIME = {chsh().key: 4, kcbs().key: 3}


def known_dprime(ineq: Inequality) -> int | None:
    """Smallest dimension with C^(1) > 1, for the built-in inequalities."""
    return KNOWN_DPRIME.get(ineq.key)


def shipped_catalog(ineq: Inequality) -> SpectrumCatalog:
    """Classical all-ones entry, plus the known optimum for CHSH or KCBS."""
    cat = SpectrumCatalog()
    a = require_normalized(ineq)
    cat.add_tuple("classical", ineq, classical_tuple(a, 1, ineq))
    if ineq.key == chsh().key:
        cat.add_tuple("tsirelson", ineq, tsirelson_tuple())
    elif ineq.key == kcbs().key:
        cat.add_tuple("kcbs-pentagram", ineq, kcbs_pentagram_tuple())
    return cat
