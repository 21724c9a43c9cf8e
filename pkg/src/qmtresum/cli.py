"""Command-line front end: ``qmtresum <command> [options]``.

Commands
--------
coeffs   exact coefficient tables
pade     Pade approximant of a series and its pole report
resum    Borel / Borel-Leroy sum at one coupling, or ``resum sweep`` over k
fit      large-order growth fit
diag     diagonalization (energies, metric)
figure   dataset behind a comparison plot
verify   golden tables and quick self-checks
sweep    diagonalization reference curves

Options may also come from an INI file (``--config``): keys of the
``[run]`` section apply to every command, keys of a section named after the
command override them, and explicit flags override both.  Exit status is 0
on success, 1 on a computational or verification failure, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from fractions import Fraction

from gmpy2 import mpc, mpfr, mpq

from . import __version__
from .errors import QmtResumError
from .series import DEFAULT_PREC, PowerSeries, format_float, format_rational, workprec

SCHEMA_VERSION = 1
log = logging.getLogger("qmtresum")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=1, sort_keys=True) + "\n"


def _model(args):
    from .pipeline import ModelSpec

    return ModelSpec(args.model, N=int(args.N), d=int(args.d))


def _load_series(args) -> PowerSeries:
    """Series from ``--in`` (a series dict or a ``coeffs`` JSON file) or from ``--model``."""
    if getattr(args, "infile", None):
        with open(args.infile) as fh:
            data = json.load(fh)
        if "coeffs" in data:
            return PowerSeries.from_dict(data)
        if "series" in data:
            q = args.quantity or "E"
            if q not in data["series"]:
                raise UsageError(f"quantity {q!r} not in {sorted(data['series'])}")
            return PowerSeries.from_dict(data["series"][q])
        raise UsageError(f"{args.infile}: no series found")
    from .pipeline import get_series

    return get_series(_model(args), args.quantity or "E", int(args.m))


def _number(text):
    """Exact rational for decimal/fraction strings."""
    try:
        return mpq(Fraction(str(text)))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _fmt(x, digits=30):
    return format_float(x, digits)


# ---------------------------------------------------------------------------
# commands


def cmd_coeffs(args):
    from .pipeline import get_series

    model = _model(args)
    m = int(args.m)
    if m < 1:
        raise UsageError("--m must be at least 1")
    qs = args.quantity.split(",") if args.quantity else ["E", "g11", "g12", "g22"]
    series = {q: get_series(model, q, m) for q in qs}
    if args.format == "json":
        text = _json({"command": "coeffs", "model": model.label(), "m": m,
                      "series": {q: s.to_dict() for q, s in series.items()}})
    else:
        lines = ["n," + ",".join(qs)]
        for n in range(m + 1):
            lines.append(f"{n}," + ",".join(format_rational(series[q].coeffs[n]) for q in qs))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_pade(args):
    from .pade import auto_pade, find_poles, pade_approx

    s = _load_series(args)
    c = s.taylor() if isinstance(s, PowerSeries) else s
    m = int(args.order) if args.order else c.m
    c = c.truncate(m)
    p = pade_approx(c, int(args.P), int(args.Q)) if args.P is not None else auto_pade(c)
    if args.report == "poles":
        rep = find_poles(p, DEFAULT_PREC)
        if args.format == "json":
            rows = [{"re": _fmt(r.location.real, 20), "im": _fmt(r.location.imag, 20), "class": r.classification,
                     "abs_residue": format(float(abs(r.residue)), ".3e")} for r in rep.poles]
            text = _json({"command": "pade", "P": p.P, "Q": p.Q, "poles": rows})
        else:
            rows = ["re,im,class,abs_residue"]
            for r in rep.poles:
                rows.append(f"{_fmt(r.location.real, 20)},{_fmt(r.location.imag, 20)},{r.classification},"
                            f"{float(abs(r.residue)):.3e}")
            text = "\n".join(rows) + "\n"
    else:
        text = _json({"command": "pade", **p.to_dict()})
    _emit(text, args.out)
    return 0


def _borel_spec(args, model=None):
    from .resum import BorelSpec

    alpha = args.alpha if args.alpha is not None else (model.gevrey if model else 1)
    beta = args.beta if args.beta is not None else 1
    return BorelSpec(_number(alpha), _number(beta), args.prescription)


def cmd_resum(args):
    from .resum import resum_leroy

    if args.action == "sweep":
        return _resum_sweep(args)
    if args.at is None:
        raise UsageError("resum needs --at z (or the 'sweep' action)")
    s = _load_series(args)
    spec = _borel_spec(args)
    res = resum_leroy(s, _number(args.at), spec, m=int(args.order) if args.order else None)
    value = res.value
    out = {"command": "resum", "prescription": res.prescription, "alpha": str(spec.alpha),
           "beta": str(spec.beta), "z": str(args.at), "error_estimate": format_float(res.error_estimate, 3),
           "diagnostics": {k: v for k, v in sorted(res.diagnostics.items())
                           if isinstance(v, (int, float, str, list))}}
    if isinstance(value, mpc):
        out["value"] = {"re": _fmt(value.real), "im": _fmt(value.imag)}
    else:
        out["value"] = _fmt(value)
    _emit(_json(out), args.out)
    return 0


def _resum_sweep(args):
    from .figures import CURVE_COLUMNS, Dataset, _curves, parse_range

    if args.param != "k":
        raise UsageError("only --param k sweeps are supported")
    model = _model(args)
    qs = args.quantity.split(",") if args.quantity else ["E"]
    beta = str(args.beta) if args.beta is not None else "1"
    pts = [(model, q, k, str(args.lam), [("borel-pade", int(args.m), beta)])
           for q in qs for k in parse_range(args.range)]
    meta = {"title": f"Borel-Pade sweep for {model.label()}", "model": model.name,
            "sweep": "k", "lambda": str(args.lam), "m": int(args.m), "beta": beta}
    ds = _curves("resum-sweep", meta, pts, int(args.jobs))
    _emit(ds.to_csv() if args.format == "csv" else ds.to_json(), args.out)
    return 0


def cmd_fit(args):
    from .asymptotics import fit_growth

    s = _load_series(args)
    alpha = None if args.alpha in (None, "auto") else int(args.alpha)
    fit = fit_growth(s, alpha=alpha, depth=int(args.depth))
    _emit(_json({"command": "fit", **fit.to_dict()}), args.out)
    return 0


def cmd_diag(args):
    from . import oracle

    p = oracle.SpectralProblem(args.model, float(args.k), float(args.lam), basis_size=int(args.basis),
                               d=int(args.d), omega=float(args.omega) if args.omega else None)
    N = int(args.N)
    out = {"command": "diag", "model": args.model, "k": str(args.k), "lambda": str(args.lam),
           "basis_size": p.basis_size, "N": N}
    if args.reference:
        ref = oracle.reference(p, N, prec=int(args.prec), metric=bool(args.qmt))
        out.update({"method": "self-converged", "basis_size": ref.basis_size, "omega": ref.omega,
                    "energy": _fmt(ref.energy), "delta": ref.delta})
        if args.qmt:
            out["qmt"] = {"g11": _fmt(ref.metric[0]), "g12": _fmt(ref.metric[1]), "g22": _fmt(ref.metric[2])}
    else:
        res = oracle.eigensolve(oracle.build_hamiltonian(p), count=min(p.basis_size, int(args.count)))
        out.update({"method": "float64", "energies": [repr(float(x)) for x in res.values],
                    "convergence": res.convergence})
        if args.qmt:
            g = oracle.qmt_numeric(p, N)
            out["qmt"] = {"g11": repr(float(g[0, 0])), "g12": repr(float(g[0, 1])), "g22": repr(float(g[1, 1]))}
    _emit(_json(out), args.out)
    return 0


def cmd_figure(args):
    from .figures import FIGURES, build

    if args.figure_id not in FIGURES:
        raise UsageError(f"unknown figure id {args.figure_id!r}; choose from {', '.join(FIGURES)}")
    opts = {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        if key in ("orders", "levels", "dims", "extra"):
            val = tuple(int(v) if key != "extra" else v for v in val.split(","))
        elif key in ("m", "m_max"):
            val = int(val)
        elif key == "betas":
            val = json.loads(val)
        opts[key] = val
    ds = build(args.figure_id, opts, jobs=int(args.jobs))
    ds.write(args.out, args.format) if args.out else _emit(
        ds.to_csv() if args.format == "csv" else ds.to_json(), None)
    return 0


def cmd_verify(args):
    from .golden import load_tables, verify_tables

    tables = load_tables(args.tables) if args.tables else None
    results = verify_tables(args.only, tables)
    failed = 0
    for name, (checked, bad) in results.items():
        status = "PASS" if not bad else "FAIL"
        print(f"{status} golden {name}: {checked - len(bad)}/{checked} entries")
        for b in bad:
            print(f"    {b}")
        failed += bool(bad)
    if not results:
        print(f"no table matches --only {args.only!r}")
        return 1
    if not args.only:
        failed += _quick_checks()
    return 1 if failed else 0


def _quick_checks() -> int:
    """Fast property checks run by ``verify`` after the tables."""
    from .pade import auto_pade
    from .resum import BorelSpec, resum_leroy
    from .series import series

    failed = 0

    def report(name, ok, detail=""):
        nonlocal failed
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
        failed += not ok

    import math
    import random

    rng = random.Random(1)
    ok = True
    for _ in range(20):
        c = [mpq(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(9)]
        if c[0] == 0:
            c[0] = mpq(1)
        try:
            p = auto_pade(c)
        except QmtResumError:
            continue
        t = p.taylor(8)
        ok &= list(t) == c
    report("pade matching condition (exact)", ok)
    s = series([math.factorial(n) * (-1) ** n for n in range(31)])
    with workprec(DEFAULT_PREC):
        v = resum_leroy(s, mpq(1), BorelSpec(mpq(1), mpq(1), "ordinary")).value
        ref = mpfr("0.596347362323194074341078499369279376074177860152548781573")
        report("Euler series Borel sum", abs(v - ref) < mpfr("1e-25"), f"|error| = {float(abs(v - ref)):.2e}")
    return failed


def cmd_sweep(args):
    from .figures import exact_sweep

    qs = args.quantity.split(",") if args.quantity else ["E", "g11", "g12", "g22"]
    ds = exact_sweep(_model(args), qs, args.range, str(args.lam), jobs=int(args.jobs))
    _emit(ds.to_csv() if args.format == "csv" else ds.to_json(), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(p, model=True):
    if model:
        p.add_argument("--model", choices=["quartic", "sextic", "ddim"])
        p.add_argument("--N", type=int, help="level (1D models)")
        p.add_argument("--d", type=int, help="dimension (ddim)")
        p.add_argument("--quantity", help="E, g11, g12, g22 (comma list where allowed)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--config", help="INI file with [run] and per-command sections")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmtresum", description="Perturbative series, Pade/Borel resummation "
                                 "and diagonalization for anharmonic oscillators and their quantum metric.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="exact coefficient tables")
    _common(p)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("pade", help="Pade approximant and poles")
    _common(p)
    p.add_argument("--in", dest="infile")
    p.add_argument("--m", type=int)
    p.add_argument("--order", type=int, help="truncate the series at this order first")
    p.add_argument("--P", type=int)
    p.add_argument("--Q", type=int)
    p.add_argument("--report", choices=["coeffs", "poles"])
    p.set_defaults(func=cmd_pade)

    p = sub.add_parser("resum", help="Borel / Borel-Leroy resummation")
    _common(p)
    p.add_argument("action", nargs="?", choices=["sweep"], help="sweep over a parameter grid")
    p.add_argument("--in", dest="infile")
    p.add_argument("--m", type=int)
    p.add_argument("--order", type=int)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--prescription", choices=["ordinary", "pv", "principal-value", "lateral+", "lateral-",
                                              "lateral-plus", "lateral-minus"])
    p.add_argument("--at", help="coupling z (reduced coupling of the series)")
    p.add_argument("--param", help="sweep parameter (k)")
    p.add_argument("--range", help="lo:hi:step or comma list")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_resum)

    p = sub.add_parser("fit", help="large-order growth fit")
    _common(p)
    p.add_argument("--in", dest="infile")
    p.add_argument("--m", type=int)
    p.add_argument("--alpha", choices=["auto", "1", "2"])
    p.add_argument("--depth", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("diag", help="exact diagonalization")
    _common(p, model=False)
    p.add_argument("--model", choices=["quartic", "sextic", "ddim"])
    p.add_argument("--N", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--basis", type=int)
    p.add_argument("--omega")
    p.add_argument("--count", type=int, help="number of eigenvalues to print")
    p.add_argument("--qmt", action="store_true", default=None)
    p.add_argument("--reference", action="store_true", default=None,
                   help="self-converged high-precision values")
    p.add_argument("--prec", type=int)
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("figure", help="dataset behind a comparison plot")
    _common(p, model=False)
    p.add_argument("figure_id")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="figure option, e.g. k_range=0.1:1:0.1, orders=25,50")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", help="golden tables and self-checks")
    p.add_argument("--only", help="table name prefix, e.g. sextic or ddim")
    p.add_argument("--tables", help="alternative table file (JSON)")
    p.add_argument("--config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="diagonalization reference curves")
    _common(p)
    p.add_argument("--param", help="sweep parameter (k)")
    p.add_argument("--range")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_sweep)
    return ap


DEFAULTS = {
    "model": "quartic", "N": 0, "d": 3, "m": 100, "alpha": None, "beta": None,
    "prescription": "pv", "k": "1", "lam": "1", "basis": 200, "count": 5, "qmt": False,
    "reference": False, "prec": 160, "jobs": 1, "depth": 4, "param": "k", "range": "0.1:10:0.1",
    "report": "poles",
}
_CONFIG_ALIASES = {"lambda": "lam", "in": "infile"}
TABLE_COMMANDS = ("coeffs", "figure", "sweep")


def _apply_config(args, parser):
    """Fill unset options from the config file, then from :data:`DEFAULTS`."""
    values = {}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise UsageError(f"cannot read config file {args.config}")
        for section in ("run", args.command):
            if cp.has_section(section):
                for key, val in cp.items(section):
                    values[_CONFIG_ALIASES.get(key, key)] = val
    for key, val in {**DEFAULTS, **values}.items():
        if getattr(args, key, None) is None and hasattr(args, key):
            if key in ("qmt", "reference") and isinstance(val, str):
                val = val.lower() in ("1", "true", "yes", "on")
            setattr(args, key, val)
    if hasattr(args, "format") and args.format is None:
        sweep = args.command == "resum" and getattr(args, "action", None) == "sweep"
        args.format = "csv" if args.command in TABLE_COMMANDS or sweep else "json"
    if getattr(args, "format", None) not in (None, "csv", "json"):
        raise UsageError("format must be csv or json")
    uses_range = args.command == "sweep" or (args.command == "resum" and getattr(args, "action", None))
    if uses_range:
        from .figures import parse_range

        try:
            parse_range(str(args.range))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad --range: {exc}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args, parser)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (QmtResumError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
