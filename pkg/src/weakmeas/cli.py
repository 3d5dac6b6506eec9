"""Command-line harness: ``sweep``, ``compare``, ``optics`` and ``fit``.

Tables are CSV with ``# key=value`` metadata lines before the header, numbers
at 12 significant digits and ``\\n`` line endings; ``--format json`` carries the
same metadata and rows. Output depends only on the arguments (and the seed),
so repeated runs are byte-identical.

Exit status: 0 success, 2 configuration error, 3 runtime or fit error,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from typing import Iterable, Sequence

import numpy as np

from . import __version__, optics
from .analysis import (
    MIN_FIT_POSTSELECT,
    EXPERIMENT_COUPLINGS,
    FitFailure,
    SweepResult,
    compare_regimes,
    fit_effective_coupling,
    sweep,
)
from .protocols import (
    CouplingConstant,
    FeedForward,
    InvalidStats,
    NonInvertible,
    Regime,
    RegimeConfig,
    _MEANING,
    forward_model,
    invert,
)
from .weakval import DivergentPostSelection, theory_curve

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4
SEED_ENV = "WEAKVAL_SEED"
DEFAULT_GAMMA = "0:0.7pi:13"
SWEEP_COLUMNS = ("gamma", "exact_aw", "estimated_aw", "stderr", "p_postselect",
                 "system_fidelity", "valid")


class ConfigError(ValueError):
    pass


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- parsing

_ANGLE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """``0.18pi``, ``pi``, ``-pi/2``, ``3pi/4``, ``0.5*pi`` or plain radians."""
    m = _ANGLE.match(text)
    if m:
        coef = m.group(1)
        if coef in ("", "+", "-"):
            coef += "1"
        value = float(coef) * math.pi
        if m.group(2):
            den = float(m.group(2))
            if den == 0:
                raise ConfigError(f"division by zero in angle {text!r}")
            value /= den
        return value
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"angle must be finite, got {text!r}")
    return value


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` with angle syntax for the bounds: n equispaced points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"gamma grid must look like lo:hi:n, got {text!r}")
    lo, hi = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise ConfigError(f"grid size must be an integer, got {parts[2]!r}") from None
    if n < 2:
        raise ConfigError(f"grid needs at least 2 points, got {n}")
    if not hi > lo:
        raise ConfigError(f"grid upper bound must exceed the lower bound in {text!r}")
    return np.linspace(lo, hi, n)


def resolve_seed(seed: int | None) -> int:
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is None:
            return 0
        try:
            seed = int(env, 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if not 0 <= seed < 1 << 64:
        raise ConfigError(f"seed must lie in [0, 2^64), got {seed}")
    return seed


def make_config(regime: str, coupling: float, feedforward: str = "true-operator") -> RegimeConfig:
    try:
        return RegimeConfig.create(regime, coupling, feedforward=feedforward)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _check_shots(shots: int) -> int:
    if shots < 0:
        raise ConfigError(f"shots must be non-negative, got {shots}")
    return shots


# ---------------------------------------------------------------- formatting

def fmt(x) -> str:
    """12 significant digits; empty for missing values."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        return ""
    if x == 0:
        x = 0.0  # no negative zero
    return f"{x:.12g}"


def jval(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, str):
        return x
    if x is None or not math.isfinite(float(x)):
        return None
    return float(fmt(x))


def render_csv(metadata: Sequence[tuple[str, object]], columns: Sequence[str],
               rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    for key, value in metadata:
        buf.write(f"# {key}={value if isinstance(value, str) else fmt(value)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def render_json(metadata: Sequence[tuple[str, object]], columns: Sequence[str],
                rows: Iterable[Sequence[object]]) -> str:
    doc = {
        "metadata": {k: jval(v) for k, v in metadata},
        "rows": [{c: jval(v) for c, v in zip(columns, row)} for row in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def render(fmt_name: str, metadata, columns, rows) -> str:
    rows = list(rows)
    return (render_json if fmt_name == "json" else render_csv)(metadata, columns, rows)


def write_output(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def sweep_rows(res: SweepResult) -> list[tuple]:
    order = np.argsort(res.gamma_grid, kind="stable")
    return [(res.gamma_grid[i], res.exact_aw[i], res.estimated_aw[i],
             res.stderr[i] if res.sampled else None, res.p_postselect[i],
             res.system_fidelity[i], bool(res.valid[i])) for i in order]


def sweep_metadata(res: SweepResult, config: RegimeConfig, seed: int) -> list[tuple[str, object]]:
    return [
        ("tool_version", __version__),
        ("regime", res.regime.value),
        ("coupling_meaning", config.coupling.meaning.value),
        ("coupling_nominal", res.nominal_coupling),
        ("coupling_fitted", res.fitted_coupling),
        ("fit_residual", res.fit_residual),
        ("feedforward", config.feedforward.value),
        ("shots", str(res.shots)),
        ("seed", str(seed)),
    ]


# ---------------------------------------------------------------- commands

def cmd_sweep(args) -> int:
    grid = parse_grid(args.gamma[0] if args.gamma else DEFAULT_GAMMA)
    if args.gamma and len(args.gamma) > 1:
        raise ConfigError("sweep takes a single --gamma grid")
    config = make_config(args.regime, parse_angle(args.coupling), args.feedforward)
    shots = _check_shots(args.shots)
    seed = resolve_seed(args.seed)
    res = sweep(config, grid, shots, seed if shots else None)
    write_output(render(args.format, sweep_metadata(res, config, seed), SWEEP_COLUMNS,
                        sweep_rows(res)), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    grids = [parse_grid(g) for g in (args.gamma or [DEFAULT_GAMMA])]
    for g in grids[1:]:
        if g.shape != grids[0].shape or not np.array_equal(g, grids[0]):
            raise ConfigError("all regimes must share one gamma grid")
    couplings = {
        Regime.WEAK: parse_angle(args.phi),
        Regime.INSENSITIVE: parse_angle(args.delta_insensitive),
        Regime.ERASURE: parse_angle(args.delta_erasure),
    }
    for regime, value in couplings.items():
        try:
            CouplingConstant(value, _MEANING[regime])
        except ValueError as exc:
            raise ConfigError(f"{regime.value}: {exc}") from None
    shots = _check_shots(args.shots)
    seed = resolve_seed(args.seed)
    report = compare_regimes(grids[0], couplings, shots, seed if shots else None,
                             feedforward=args.feedforward)

    summary = (f"consistent={'true' if report.consistent else 'false'} "
               f"fraction={fmt(report.consistent_fraction)}")
    metadata: list[tuple[str, object]] = [
        ("tool_version", __version__),
        ("shots", str(shots)),
        ("seed", str(seed)),
        ("feedforward", FeedForward(args.feedforward).value),
    ]
    for regime, res in report.sweeps.items():
        metadata += [(f"coupling_nominal_{regime.value}", res.nominal_coupling),
                     (f"coupling_fitted_{regime.value}", res.fitted_coupling)]
    for (a, b), d in report.pairwise_max_delta.items():
        metadata.append((f"max_delta_{a.value}_{b.value}", d))
    metadata += [("consistent_fraction", report.consistent_fraction),
                 ("consistent", bool(report.consistent))]

    columns = ("regime",) + SWEEP_COLUMNS
    rows = [(regime.value,) + row for regime, res in report.sweeps.items() for row in sweep_rows(res)]
    write_output(render(args.format, metadata, columns, rows), args.out)
    print(summary, file=sys.stderr if args.out == "-" else sys.stdout)
    return EXIT_OK


def _cplx(z: complex) -> str:
    re_, im = (0.0 if abs(v) < 1e-12 else v for v in (z.real, z.imag))
    return f"{fmt(re_)}{'+' if im >= 0 else '-'}{fmt(abs(im))}j"


def cmd_optics(args) -> int:
    phi = parse_angle(args.phi)
    if not 0 <= phi <= math.pi:
        raise ConfigError(f"phi must lie in [0, pi], got {phi}")
    chain = optics.build_chain(phi, balance=not args.no_balance)
    gate, success = optics.effective_gate(chain)
    distance = optics.gate_distance(chain) if chain.balanced else math.nan
    amps = optics.basis_amplitudes(chain)
    overlaps = optics.trace_overlaps(chain)

    metadata = [("tool_version", __version__), ("phi", phi),
                ("balanced", chain.balanced), ("success_probability", success),
                ("distance_to_target", distance)]
    trace = [(case, name, arm, p, s, sign * phi / 2, ov)
             for case, rows in optics.TRACE_REFERENCE.items()
             for (name, p, arm, s, sign), (_, ov) in zip(rows, overlaps[case])]

    if args.format == "json":
        doc = {
            "metadata": {k: jval(v) for k, v in metadata},
            "chain": [{"element": s.name, "placement": s.placement,
                       "kind": s.element.kind if s.element else s.kind} for s in chain.steps],
            "success_amplitudes": {k: jval(v) for k, v in amps.items()},
            "gate_real": [[jval(z.real) for z in row] for row in gate],
            "gate_imag": [[jval(z.imag) for z in row] for row in gate],
            "trace": [dict(zip(("input", "element", "arm", "pointer", "signal", "phase", "overlap"),
                               (c, n, "upper" if a else "lower", p, s, jval(ph), jval(o))))
                      for c, n, a, p, s, ph, o in trace],
        }
        write_output(json.dumps(doc, indent=2) + "\n", args.out)
        return EXIT_OK

    parts = [render_csv(metadata, ("input", "success_amplitude"), amps.items())]
    parts.append(chain.describe() + "\n")
    parts.append("# effective gate, system-first basis |signal,pointer>\n" + render_csv(
        [], ("row", "c00", "c01", "c10", "c11"),
        [(f"{i >> 1}{i & 1}", *(_cplx(z) for z in gate[i])) for i in range(4)]))
    parts.append("# two-mode trace for |VH> and |VV> inputs\n" + render_csv(
        [], ("input", "element", "arm", "pointer", "signal", "phase", "overlap"),
        [(c, n, "upper" if a else "lower", p, s, ph, o) for c, n, a, p, s, ph, o in trace]))
    write_output("".join(parts), args.out)
    return EXIT_OK


def read_fit_table(path: str, regime: Regime | None) -> tuple[Regime, list[tuple[float, float]]]:
    """(gamma, raw_stat) points from a two-column table or a sweep output.

    Sweep tables carry no raw statistic; it is rebuilt from ``estimated_aw``
    and ``coupling_fitted`` by the forward model of the regime's estimator,
    keeping only valid rows whose post-selection probability is large enough.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    meta, body = {}, []
    for lineno, line in enumerate(lines, 1):
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append((lineno, line))
    if not body:
        raise InputError(f"{path}: no header row")
    header = next(csv.reader([body[0][1]]))
    if regime is None:
        if "regime" not in meta:
            raise ConfigError("regime unknown: pass --regime or use a table with '# regime=' metadata")
        regime = Regime(meta["regime"])

    def number(lineno, col, text, allow_empty=False):
        if text == "" and allow_empty:
            return math.nan
        try:
            return float(text)
        except ValueError:
            raise InputError(f"{path}: row {lineno}: column {col!r} is not a number: {text!r}") from None

    points = []
    if header[:2] == ["gamma", "raw_stat"]:
        for lineno, line in body[1:]:
            cells = next(csv.reader([line]))
            if len(cells) != len(header):
                raise InputError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(cells)}")
            points.append((number(lineno, "gamma", cells[0]), number(lineno, "raw_stat", cells[1])))
    elif header == list(SWEEP_COLUMNS):
        try:
            c = float(meta["coupling_fitted"])
        except (KeyError, ValueError):
            raise InputError(f"{path}: sweep table lacks '# coupling_fitted=' metadata") from None
        for lineno, line in body[1:]:
            cells = next(csv.reader([line]))
            if len(cells) != len(header):
                raise InputError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(cells)}")
            row = dict(zip(header, cells))
            if row["valid"] not in ("true", "false"):
                raise InputError(f"{path}: row {lineno}: column 'valid' must be true or false")
            g = number(lineno, "gamma", row["gamma"])
            a = number(lineno, "estimated_aw", row["estimated_aw"], allow_empty=True)
            p = number(lineno, "p_postselect", row["p_postselect"], allow_empty=True)
            if row["valid"] == "true" and math.isfinite(a) and p >= MIN_FIT_POSTSELECT:
                points.append((g, float(forward_model(regime, a, c))))
    else:
        raise InputError(f"{path}: header must start with gamma,raw_stat or match the sweep schema")
    return regime, points


def cmd_fit(args) -> int:
    regime = Regime(args.regime) if args.regime else None
    regime, points = read_fit_table(args.input, regime)
    points.sort(key=lambda p: p[0])
    fit = fit_effective_coupling(points, regime)
    rows = []
    for g, r in points:
        try:
            theory = theory_curve(g)
        except DivergentPostSelection:
            theory = math.nan
        rows.append((g, r, float(invert(regime, r, fit.coupling)), theory))
    metadata = [("tool_version", __version__), ("regime", regime.value),
                ("coupling_fitted", fit.coupling), ("fit_residual", fit.residual),
                ("points", str(len(points)))]
    write_output(render(args.format, metadata, ("gamma", "raw_stat", "estimated_aw", "theory_aw"),
                        rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # single-line diagnostic, config exit status
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weakmeas", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, shots=True):
        sp.add_argument("--out", default="-", help="output path, '-' for stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if shots:
            sp.add_argument("--shots", type=int, default=0,
                            help="emitted pairs per point; 0 for exact expectations")
            sp.add_argument("--seed", type=int, default=None,
                            help=f"master seed (falls back to ${SEED_ENV}, then 0)")
            sp.add_argument("--feedforward", choices=[f.value for f in FeedForward],
                            default=FeedForward.TRUE_OPERATOR.value)

    sp = sub.add_parser("sweep", help="one regime over a gamma grid")
    sp.add_argument("--regime", choices=[r.value for r in Regime], default="weak")
    sp.add_argument("--coupling", default=None,
                    help="phi for weak, delta otherwise; angle syntax such as 0.18pi")
    sp.add_argument("--gamma", action="append", help=f"lo:hi:n (default {DEFAULT_GAMMA})")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    cp = sub.add_parser("compare", help="all three regimes on one grid")
    cp.add_argument("--gamma", action="append",
                    help="lo:hi:n; repeat only with identical grids")
    cp.add_argument("--phi", default="0.18pi")
    cp.add_argument("--delta-insensitive", default=repr(EXPERIMENT_COUPLINGS[Regime.INSENSITIVE]))
    cp.add_argument("--delta-erasure", default=repr(EXPERIMENT_COUPLINGS[Regime.ERASURE]))
    common(cp)
    cp.set_defaults(func=cmd_compare)

    op = sub.add_parser("optics", help="linear-optical c-phase chain report")
    op.add_argument("--phi", required=True)
    op.add_argument("--no-balance", action="store_true", help="leave out the balancing attenuators")
    common(op, shots=False)
    op.set_defaults(func=cmd_optics)

    fp = sub.add_parser("fit", help="fit the effective coupling to a table")
    fp.add_argument("input", help="gamma,raw_stat table or a sweep output")
    fp.add_argument("--regime", choices=[r.value for r in Regime], default=None)
    common(fp, shots=False)
    fp.set_defaults(func=cmd_fit)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "sweep" and args.coupling is None:
        args.coupling = {"weak": "0.18pi"}.get(args.regime, repr(EXPERIMENT_COUPLINGS[Regime(args.regime)]))
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"weakmeas: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitFailure, NonInvertible, InvalidStats, optics.ChainUnbalanced, ArithmeticError) as exc:
        print(f"weakmeas: fit/runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"weakmeas: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"weakmeas: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
