"""Line-oriented text formats for states, tuples, measurements, witness
certificates and spectrum catalogs.

Every format starts with a ``<kind> v1`` header; ``#`` starts a comment and
blank lines are ignored. Complex entries are written ``a``, ``a+bi`` or
``a-bi``.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .inequality import Inequality
from .measure.catalog import CatalogEntry, SpectrumCatalog
from .operators import MAX_DIM, ObservableTuple, OperatorError, QuantumState
from .preparation import PreparationError, ProjectiveMeasurement, WitnessCertificate

_REAL = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"(?:{_REAL})(?:[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i)?|{_REAL}i")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_complex(tok: str, line: int | None = None) -> complex:
    if not _COMPLEX_RE.fullmatch(tok):
        raise FormatError(f"bad complex literal {tok!r}", line)
    return complex(tok.replace("i", "j"))


def format_complex(z: complex, digits: int = 17) -> str:
    z = complex(z)
    re_s = f"{z.real:.{digits}g}"
    if z.imag == 0:
        return re_s
    im_s = f"{abs(z.imag):.{digits}g}"
    return f"{re_s}{'-' if z.imag < 0 else '+'}{im_s}i"


def _lines(text: str):
    """Yield ``(line_number, tokens)`` for the non-blank lines."""
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


class _Reader:
    def __init__(self, text: str, kind: str):
        self.items = list(_lines(text))
        self.pos = 0
        no, toks = self.next(f"{kind} v1 header")
        if toks != [kind, "v1"]:
            raise FormatError(f"expected header '{kind} v1'", no)

    def done(self) -> bool:
        return self.pos >= len(self.items)

    def next(self, what: str):
        if self.done():
            last = self.items[-1][0] if self.items else None
            raise FormatError(f"unexpected end of input, expected {what}", last)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def keyword(self, key: str, n_args: int | None = None):
        no, toks = self.next(f"'{key}' line")
        if toks[0] != key:
            raise FormatError(f"expected '{key}', got '{toks[0]}'", no)
        if n_args is not None and len(toks) != n_args + 1:
            raise FormatError(f"'{key}' takes {n_args} argument(s)", no)
        return no, toks[1:]

    def integer(self, key: str) -> int:
        no, args = self.keyword(key, 1)
        try:
            return int(args[0])
        except ValueError:
            raise FormatError(f"'{key}' needs an integer", no) from None

    def dim(self) -> int:
        no = self.items[self.pos][0] if not self.done() else None
        d = self.integer("dim")
        if not 1 <= d <= MAX_DIM:
            raise FormatError(f"dimension {d} outside 1..{MAX_DIM}", no)
        return d

    def row(self, d: int) -> np.ndarray:
        no, toks = self.next("matrix row")
        if len(toks) != d:
            raise FormatError(f"expected {d} entries, got {len(toks)}", no)
        return np.array([parse_complex(t, no) for t in toks])

    def matrix(self, d: int) -> np.ndarray:
        return np.vstack([self.row(d) for _ in range(d)])


def _write_matrix(m: np.ndarray) -> list[str]:
    return [" ".join(format_complex(z) for z in row) for row in m]


# -- state ------------------------------------------------------------------

def parse_state(text: str) -> QuantumState:
    rd = _Reader(text, "state")
    d = rd.dim()
    if rd.done():
        raise FormatError("missing matrix or spectrum")
    no, toks = rd.items[rd.pos]
    try:
        if toks[0] == "spectrum":
            rd.pos += 1
            if len(toks) != d + 1:
                raise FormatError(f"spectrum needs {d} values", no)
            vals = []
            for t in toks[1:]:
                z = parse_complex(t, no)
                if z.imag:
                    raise FormatError("spectrum values must be real", no)
                vals.append(z.real)
            state = QuantumState.from_spectrum(vals)
        else:
            state = QuantumState.from_matrix(rd.matrix(d))
    except OperatorError as exc:
        raise FormatError(str(exc), no) from None
    if not rd.done():
        raise FormatError("trailing content", rd.items[rd.pos][0])
    return state


def serialize_state(state: QuantumState) -> str:
    out = ["state v1", f"dim {state.dim}"]
    if state.has_matrix:
        out += _write_matrix(state.matrix)
    else:
        out.append("spectrum " + " ".join(f"{x:.17g}" for x in state.eigenvalues))
    return "\n".join(out) + "\n"


# -- tuple ------------------------------------------------------------------

def _read_observables(rd: _Reader, d: int) -> list[np.ndarray]:
    mats = []
    while not rd.done():
        no, args = rd.keyword("observable", 1)
        if args[0] != str(len(mats) + 1):
            raise FormatError(f"expected observable {len(mats) + 1}", no)
        mats.append(rd.matrix(d))
    return mats


def parse_tuple(text: str, ineq: Inequality | None = None) -> ObservableTuple:
    rd = _Reader(text, "tuple")
    d = rd.dim()
    mats = _read_observables(rd, d)
    if not mats:
        raise FormatError("tuple has no observables")
    try:
        return ObservableTuple.from_matrices(mats, ineq)
    except OperatorError as exc:
        raise FormatError(str(exc)) from None


def _observable_lines(tup: ObservableTuple) -> list[str]:
    out = []
    for k, a in enumerate(tup.observables, start=1):
        out.append(f"observable {k}")
        out += _write_matrix(a)
    return out


def serialize_tuple(tup: ObservableTuple) -> str:
    return "\n".join(["tuple v1", f"dim {tup.dim}", *_observable_lines(tup)]) + "\n"


# -- measurement --------------------------------------------------------------

def parse_measurement(text: str) -> ProjectiveMeasurement:
    rd = _Reader(text, "meas")
    d = rd.dim()
    bases = []
    while not rd.done():
        no = rd.items[rd.pos][0]
        r = rd.integer("projector")
        if not 1 <= r <= d:
            raise FormatError(f"projector rank {r} outside 1..{d}", no)
        bases.append(np.column_stack([rd.row(d) for _ in range(r)]))
    try:
        return ProjectiveMeasurement.from_bases(bases)
    except PreparationError as exc:
        raise FormatError(str(exc)) from None


def serialize_measurement(meas: ProjectiveMeasurement) -> str:
    out = ["meas v1", f"dim {meas.dim}"]
    for b in meas.bases:
        out.append(f"projector {b.shape[1]}")
        out += _write_matrix(b.T)
    return "\n".join(out) + "\n"


# -- witness certificate --------------------------------------------------------

def serialize_certificate(cert: WitnessCertificate, ineq: Inequality) -> str:
    out = ["cert v1", f"ineq {ineq.key}", f"dim {cert.tuple.dim}",
           f"outcome {cert.outcome + 1}", f"t1 {cert.t1:.17g}",
           f"source {cert.source or '-'}",
           "phi " + " ".join(format_complex(z) for z in cert.phi),
           *_observable_lines(cert.tuple)]
    return "\n".join(out) + "\n"


def parse_certificate(text: str, ineq: Inequality) -> WitnessCertificate:
    rd = _Reader(text, "cert")
    no, (key,) = rd.keyword("ineq", 1)
    if key != ineq.key:
        raise FormatError(f"certificate is for {key}, not {ineq.key}", no)
    d = rd.dim()
    outcome = rd.integer("outcome") - 1
    no, (t1,) = rd.keyword("t1", 1)
    try:
        t1 = float(t1)
    except ValueError:
        raise FormatError("t1 must be real", no) from None
    _, (source,) = rd.keyword("source", 1)
    no, phi = rd.keyword("phi", d)
    phi = np.array([parse_complex(t, no) for t in phi])
    mats = _read_observables(rd, d)
    try:
        tup = ObservableTuple.from_matrices(mats, ineq)
    except OperatorError as exc:
        raise FormatError(str(exc)) from None
    return WitnessCertificate(outcome, tup, phi, t1, "" if source == "-" else source)


# -- catalog --------------------------------------------------------------------

def parse_catalog(text: str) -> SpectrumCatalog:
    rd = _Reader(text, "catalog")
    cat = SpectrumCatalog()
    while not rd.done():
        no, toks = rd.next("entry")
        if toks[0] != "entry" or len(toks) < 6 or toks[4] != ":":
            raise FormatError("expected 'entry <label> <ineq-id> <d> : t1 ... td'", no)
        label, key, d = toks[1], toks[2], toks[3]
        try:
            d = int(d)
            t = [float(x) for x in toks[5:]]
        except ValueError:
            raise FormatError("bad dimension or spectrum value", no) from None
        if len(t) != d:
            raise FormatError(f"entry has {len(t)} values, dimension is {d}", no)
        try:
            cat.add(CatalogEntry(label, key, d, np.array(t)))
        except ValueError as exc:
            raise FormatError(str(exc), no) from None
    return cat


def serialize_catalog(cat: SpectrumCatalog) -> str:
    out = ["catalog v1"]
    for e in cat:
        out.append(f"entry {e.label} {e.ineq_key} {e.dim} : " + " ".join(f"{x:.17g}" for x in e.spectrum))
    return "\n".join(out) + "\n"


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")
