"""Command-line interface: ``ctxprep {validate,cd,prepare,witness,check}``.

Exit codes: 0 success, 1 domain-negative result (not normalized, no
witness, failing suite), 2 usage or parse error. Every report starts with a
single timestamp header line; the rest is deterministic for a given command
line and seed.
"""
from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, shipped_inequality_text
from .checks import SUITES, run_suite
from .formats import (
    FormatError,
    parse_catalog,
    parse_measurement,
    parse_state,
    read_text,
    serialize_catalog,
    serialize_certificate,
    serialize_tuple,
)
from .inequality import (
    InequalityError,
    NotNormalizedError,
    parse_inequality,
    validate_normalization,
)
from .measure.catalog import SpectrumCatalog, known_dprime, shipped_catalog
from .measure.seesaw import SeesawOptions, cd_seesaw
from .measure.spectral import cd_spectral
from .operators import OperatorError, QuantumState, projector_state
from .preparation import (
    PreparationError,
    WitnessError,
    corollary2_check,
    measure,
    prop3_classify,
    prop4_witness,
    state_adapted_witness,
    verify_witness,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.7g}"


def _sign(a: int) -> str:
    return "+" if a > 0 else "-"


class Report:
    def __init__(self, command: str):
        self.lines = [f"# ctxprep {__version__} {command} {datetime.now(timezone.utc).isoformat(timespec='seconds')}"]

    def __call__(self, line: str = ""):
        self.lines.append(line)

    def emit(self):
        sys.stdout.write("\n".join(self.lines) + "\n")


# -- input loading ---------------------------------------------------------------

def _load_ineq(arg: str | None):
    if arg is None:
        raise UsageError("--ineq is required")
    path = Path(arg)
    if not path.exists() and arg in ("chsh", "kcbs"):
        return parse_inequality(shipped_inequality_text(arg))
    if not path.exists():
        raise UsageError(f"inequality file not found: {arg}")
    return parse_inequality(read_text(path))


def _load_state(args) -> QuantumState:
    if args.state:
        if not Path(args.state).exists():
            raise UsageError(f"state file not found: {args.state}")
        return parse_state(read_text(args.state))
    if args.dim:
        return projector_state(args.dim, args.rank or 1)
    raise UsageError("give --state, or --dim (with optional --rank) for a projector state")


def _load_catalog(args, ineq) -> SpectrumCatalog:
    cat = shipped_catalog(ineq)
    if args.catalog:
        if not Path(args.catalog).exists():
            raise UsageError(f"catalog file not found: {args.catalog}")
        for e in parse_catalog(read_text(args.catalog)):
            cat.add(e, ineq if e.ineq_key == ineq.key else None)
    return cat


def _dprime(args, ineq) -> int:
    if args.dprime:
        return args.dprime
    dp = known_dprime(ineq)
    if dp is None:
        raise UsageError("--dprime is required for this inequality")
    return dp


def _write(path: str, text: str):
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


# -- commands ------------------------------------------------------------------

def cmd_validate(args) -> int:
    ineq = _load_ineq(args.ineq or args.path)
    rep = validate_normalization(ineq)
    out = Report("validate")
    out(f"inequality {ineq.key}: {ineq.n_observables} observables, {len(ineq.terms)} terms")
    out(f"assignments checked {rep.n_assignments_checked}")
    argmax = ",".join(_sign(a) for a in rep.argmax)
    if rep.is_normalized:
        out(f"max {rep.max_value} at ({argmax})")
        out("normalized")
    else:
        out(f"max {rep.max_value} at ({argmax}), NOT normalized")
    out.emit()
    return EXIT_OK if rep.is_normalized else EXIT_NEGATIVE


def _seesaw_options(args, default_restarts: int) -> SeesawOptions:
    return SeesawOptions(
        restarts=args.restarts if args.restarts is not None else default_restarts,
        max_sweeps=args.sweeps if args.sweeps is not None else 500,
        seed=args.seed,
    )


def cmd_cd(args) -> int:
    ineq = _load_ineq(args.ineq)
    state = _load_state(args)
    d = state.dim
    cat = _load_catalog(args, ineq)
    out = Report("cd")
    out(f"inequality {ineq.key}, d = {d}, state rank {state.rank}")
    cat_val, entry = cd_spectral(state.eigenvalues, cat, ineq, d)
    out(f"catalog lower bound {fmt(cat_val)} (entry {entry.label})")
    best = cat_val
    if state.has_matrix:
        opts = _seesaw_options(args, 32)
        res = cd_seesaw(state, ineq, opts)
        out(f"see-saw lower bound {fmt(res.value)} (restart {res.restart_index}, "
            f"{res.sweeps_used} sweeps, {'converged' if res.converged else 'sweep limit'})")
        best = max(best, res.value)
        if args.out:
            _write(args.out, serialize_tuple(res.witness))
            out(f"witness tuple written to {args.out}")
        if args.save_catalog:
            cat.add_tuple(f"seesaw-d{d}-seed{args.seed}", ineq, res.witness)
            _write(args.save_catalog, serialize_catalog(cat))
            out(f"catalog written to {args.save_catalog}")
    else:
        out("see-saw skipped (spectrum-only state)")
    out(f"C_{d} >= {fmt(best)}")
    out.emit()
    return EXIT_OK


def cmd_prepare(args) -> int:
    ineq = _load_ineq(args.ineq)
    state = _load_state(args)
    if not args.meas:
        raise UsageError("--meas is required")
    meas = parse_measurement(read_text(args.meas))
    dprime = _dprime(args, ineq)
    cat = _load_catalog(args, ineq)
    d = meas.dim
    rep = measure(state, meas)
    cls = prop3_classify(state, meas, dprime)
    opts = _seesaw_options(args, 4) if args.restarts != 0 else None
    out = Report("prepare")
    out(f"inequality {ineq.key}, d = {d}, d' = {dprime}, ranks {','.join(map(str, meas.ranks))}")
    out(f"rank guarantee: {cls.branch}")
    out(f"{'outcome':>7} {'prob':>13} {'rank':>4} {'tag':>10} {'bound':>13} {'seesaw':>13}")
    for m in range(len(meas)):
        p = rep.probabilities[m]
        if m not in rep.outcome_set:
            out(f"{m + 1:>7} {fmt(p):>13} {meas.ranks[m]:>4} {'absent':>10} {'-':>13} {'-':>13}")
            continue
        tag = cls.tags[m]
        try:
            cert = state_adapted_witness(state, meas, m, ineq, cat)
            _, bound = verify_witness(state, cert, meas, ineq)
            bound_s = fmt(bound)
        except WitnessError:
            bound_s = "-"
        seesaw_s = "-"
        if opts is not None:
            seesaw_s = fmt(cd_seesaw(rep.post_states[m], ineq, opts).value)
        out(f"{m + 1:>7} {fmt(p):>13} {meas.ranks[m]:>4} {tag:>10} {bound_s:>13} {seesaw_s:>13}")
    if len(meas) == 1:
        out("single projector: the post state equals the input; "
            "all outcomes obey iff C_d(rho) <= 1")
    if d >= 2 * dprime - 3:
        v = corollary2_check(state, meas, dprime, ineq, cat)
        out(f"single outcome: {'yes' if v.single_outcome else 'no'}")
        out(f"verdict: {v.verdict}")
    else:
        out(f"verdict: not applicable (d < 2d'-3 = {2 * dprime - 3})")
    out.emit()
    return EXIT_OK


def cmd_witness(args) -> int:
    ineq = _load_ineq(args.ineq)
    if not args.meas:
        raise UsageError("--meas is required")
    meas = parse_measurement(read_text(args.meas))
    dprime = _dprime(args, ineq)
    cat = _load_catalog(args, ineq)
    out = Report("witness")
    try:
        cert = prop4_witness(meas, ineq, dprime, cat)
    except WitnessError as exc:
        out(f"no witness: {exc}")
        out.emit()
        return EXIT_NEGATIVE
    out(f"inequality {ineq.key}, d = {meas.dim}, d' = {dprime}")
    out(f"outcome {cert.outcome + 1} (rank {meas.ranks[cert.outcome]})")
    out(f"t1 {fmt(cert.t1)} from {cert.source}")
    if args.state:
        state = _load_state(args)
        value, bound = verify_witness(state, cert, meas, ineq)
        out(f"value {fmt(value)} >= certified bound {fmt(bound)}")
    if args.tuple:
        _write(args.tuple, serialize_tuple(cert.tuple))
        out(f"tuple written to {args.tuple}")
    if args.out:
        _write(args.out, serialize_certificate(cert, ineq))
        out(f"certificate written to {args.out}")
    out.emit()
    return EXIT_OK


def cmd_check(args) -> int:
    res = run_suite(args.suite, args.seed)
    out = Report("check")
    out(f"suite {res.name}, seed {args.seed}")
    for c in res.checks:
        out(f"{c.name}: {c.passed}/{c.total} pass, worst residual {fmt(c.worst)}")
    out("PASS" if res.ok else "FAIL")
    out.emit()
    return EXIT_OK if res.ok else EXIT_NEGATIVE


# -- parser -------------------------------------------------------------------

def _positive(raw: str) -> int:
    v = int(raw)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonnegative(raw: str) -> int:
    v = int(raw)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxprep",
        description="Noncontextuality-inequality violations and state preparation by measurement.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, state=False, meas=False, seesaw=False):
        p.add_argument("--ineq", help="inequality file (or 'chsh' / 'kcbs' for the bundled ones)")
        p.add_argument("--catalog", help="extra catalog v1 file merged with the shipped entries")
        p.add_argument("--seed", type=int, default=0)
        if state:
            p.add_argument("--state", help="state v1 file")
            p.add_argument("--dim", type=_positive, help="use the projector state Pi/r in this dimension")
            p.add_argument("--rank", type=_positive, help="rank r of the projector state (default 1)")
        if meas:
            p.add_argument("--meas", help="meas v1 file")
            p.add_argument("--dprime", type=_positive, help="smallest violating dimension d'")
        if seesaw:
            p.add_argument("--restarts", type=_nonnegative, help="see-saw restarts")
            p.add_argument("--sweeps", type=_positive, help="maximum sweeps per restart")
        p.add_argument("--out", help="output file")

    p = sub.add_parser("validate", help="exact classical maximum of an inequality")
    p.add_argument("path", nargs="?", help="inequality file")
    p.add_argument("--ineq")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cd", help="lower bounds on C_d for a state")
    common(p, state=True, seesaw=True)
    p.add_argument("--save-catalog", help="write the catalog, including the see-saw witness spectrum")
    p.set_defaults(func=cmd_cd)

    p = sub.add_parser("prepare", help="post-measurement states and their violation bounds")
    common(p, state=True, meas=True, seesaw=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("witness", help="state-independent witness for a measurement")
    common(p, state=True, meas=True)
    p.add_argument("--tuple", help="write the witness tuple (tuple v1) here")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("check", help="run a seeded property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotNormalizedError as exc:
        print(f"ctxprep: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (UsageError, FormatError, InequalityError) as exc:
        print(f"ctxprep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OperatorError, PreparationError, WitnessError) as exc:
        print(f"ctxprep: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
