"""Command-line sweeps over the equivocation toolkit.

Every command reads a joint source (``--source PATH`` to a JSON/CSV matrix,
or the built-in name ``canon``), evaluates a grid and writes one CSV record
per grid point (or a JSON document).  Inputs are always in nats; ``--units
bits`` converts nats-valued outputs once, when rows are written.

Exit status: 0 on success, 1 on invalid input, 2 when an asserted one-shot
bound is violated (or, with ``--strict``, when any bound is reported).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import measures as ms
from . import oneshot, second_order, spectrum
from .dist import CANON, JointSource, load_joint, load_source_file
from .errors import EquivocationError
from .hashing import HashFamily, all_functions_family, toeplitz_family

LN2 = math.log(2)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ----------------------------------------------------------------- parsing


def parse_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise InputError("empty list")
    return values


def parse_grid(text: str) -> list[float]:
    """``LO:HI:STEP`` inclusive of HI (to within half a step), or a plain list."""
    if ":" not in text:
        return parse_list(text)
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"grid must be LO:HI:STEP, got {text!r}") from None
    if not step > 0 or hi < lo:
        raise InputError(f"empty grid {text!r}")
    count = int(math.floor((hi - lo) / step + 0.5)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def read_source(spec: str) -> JointSource:
    if spec.lower() == "canon":
        return CANON
    path = Path(spec)
    if not path.exists():
        raise InputError(f"source file not found: {spec}")
    return load_source_file(path)


def parse_family(spec: str, source: JointSource, seed: int | None) -> HashFamily:
    """``all:M``, ``toeplitz:IN:OUT`` (full) or ``toeplitz:IN:OUT:K`` (sampled)."""
    parts = spec.split(":")
    try:
        if parts[0] == "all" and len(parts) == 2:
            return all_functions_family(source.a_size, int(parts[1]))
        if parts[0] == "toeplitz" and len(parts) in (3, 4):
            in_bits, out_bits = int(parts[1]), int(parts[2])
            if 2**in_bits != source.a_size:
                raise InputError(f"toeplitz input of {in_bits} bits needs |A| = {2**in_bits}, source has {source.a_size}")
            k = int(parts[3]) if len(parts) == 4 else None
            return toeplitz_family(in_bits, out_bits, seed, k)
    except ValueError:
        pass
    if Path(spec).exists():
        return HashFamily.from_json(Path(spec).read_text())
    raise InputError(f"bad --family {spec!r}; use all:M, toeplitz:IN:OUT[:K] or a JSON file")


# ------------------------------------------------------------------ output


class Table:
    """Rows plus the set of columns that carry nats (or nats^2) values."""

    def __init__(self, columns, nats=(), nats2=(), meta=None):
        self.columns = list(columns)
        self.nats = set(nats)
        self.nats2 = set(nats2)
        self.rows: list[dict] = []
        self.meta = meta or {}

    def convert(self, units: str) -> list[dict]:
        if units == "nats":
            return self.rows
        out = []
        for row in self.rows:
            row = dict(row)
            for k in self.nats:
                if row.get(k) is not None:
                    row[k] = row[k] / LN2
            for k in self.nats2:
                if row.get(k) is not None:
                    row[k] = row[k] / LN2**2
            out.append(row)
        return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(table: Table, units: str, fmt: str) -> str:
    rows = table.convert(units)
    if fmt == "json":
        clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()} for r in rows]
        return json.dumps({"units": units, "rows": clean, **table.meta}, indent=2, default=_json_default) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in table.columns])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pmap(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _safe(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except EquivocationError:
        return None


# ---------------------------------------------------------------- commands


def cmd_measures(args, source: JointSource) -> Table:
    ve = ms.varentropies(source)
    t = Table(
        ["s", "H", "H_up", "C", "C_up", "sibson_mi", "arimoto_mi", "H_shannon", "V", "V1", "V2"],
        nats=["H", "H_up", "C", "C_up", "sibson_mi", "arimoto_mi", "H_shannon"],
        nats2=["V", "V1", "V2"],
    )
    h1 = ms.shannon_cond_entropy(source)
    for s in args.s:
        t.rows.append(
            {
                "s": s,
                "H": ms.cond_renyi_H(source, s),
                "H_up": _safe(ms.cond_renyi_H_up, source, s),
                "C": ms.security_measure(source, s, "std"),
                "C_up": _safe(ms.security_measure, source, s, "up"),
                "sibson_mi": _safe(ms.sibson_mi, source, s),
                "arimoto_mi": _safe(ms.arimoto_mi, source, s),
                "H_shannon": h1,
                "V": ve.v,
                "V1": ve.v1,
                "V2": ve.v2,
            }
        )
    return t


def _equiv_row(p, sr):
    source, (s, r) = load_joint(p), sr
    return {
        "s": s,
        "r": r,
        "plus_std": _safe(asy.equiv_limit, source, s, r, "plus", "std"),
        "plus_up": _safe(asy.equiv_limit, source, s, r, "plus", "up"),
        "minus_std": _safe(asy.equiv_limit, source, s, r, "minus", "std"),
        "minus_up": _safe(asy.equiv_limit, source, s, r, "minus", "up"),
    }


def cmd_equivocation(args, source: JointSource) -> Table:
    cols = ["s", "r", "plus_std", "plus_up", "minus_std", "minus_up"]
    t = Table(cols, nats=cols[1:])
    grid = [(s, r) for s in args.s for r in _need(args.r_grid, "--r-grid")]
    t.rows = _pmap(partial(_equiv_row, source.p.tolist()), grid, args.jobs)
    return t


def _exp_row(p, sr):
    source, (s, r) = load_joint(p), sr
    row = {"s": s, "r": r}
    for sign in ("plus", "minus"):
        for form in ("std", "up"):
            row[f"{sign}_{form}"] = _safe(asy.exponent, source, s, r, sign, form, check_hypothesis=False)
    row["hypothesis_std"] = r >= asy.critical_rate(source, 1.0, "std")
    row["hypothesis_up"] = r >= asy.critical_rate(source, 1.0, "up")
    return row


def cmd_exponents(args, source: JointSource) -> Table:
    cols = ["s", "r", "plus_std", "plus_up", "minus_std", "minus_up", "hypothesis_std", "hypothesis_up"]
    crossings = {}
    for s in args.s:
        crossings[repr(s)] = {
            f"{sign}_{form}": asy.exponent_zero_crossing(source, s, sign, form) / (LN2 if args.units == "bits" else 1)
            for sign in ("plus", "minus")
            for form in ("std", "up")
        }
    t = Table(cols, nats=cols[1:6], meta={"zero_crossings": crossings})
    grid = [(s, r) for s in args.s for r in _need(args.r_grid, "--r-grid")]
    t.rows = _pmap(partial(_exp_row, source.p.tolist()), grid, args.jobs)
    return t


def _so_row(p, sl):
    source, (s, l) = load_joint(p), sl
    g = second_order.GaussianSpec.of(source)
    row = {"s": s, "L": l, "case_b": second_order.case_b_limit(l, g.v)}
    if 0 < s <= 1:
        row["case_a"] = l if l >= 0 else -s * l
        cs = second_order.second_order_limit(source, s, l, "C_std", "std")
        row.update(c_std_lower=cs.lower, c_std_upper=cs.upper, c_std_consistent=cs.consistent)
    if 0 < s < 1:
        cu = second_order.second_order_limit(source, s, l, "C_up", "up")
        row.update(c_up_lower=cu.lower, c_up_upper=cu.upper, c_up_consistent=cu.consistent)
    return row


def cmd_second_order(args, source: JointSource) -> Table:
    cols = ["s", "L", "case_a", "case_b", "c_std_lower", "c_std_upper", "c_std_consistent", "c_up_lower", "c_up_upper", "c_up_consistent"]
    # L is on the sqrt(n)-nats scale, so it converts like a rate
    t = Table(cols, nats=["L", "case_a", "case_b", "c_std_lower", "c_std_upper", "c_up_lower", "c_up_upper"])
    grid = [(s, l) for s in args.s for l in _need(args.l_grid, "--l-grid")]
    t.rows = _pmap(partial(_so_row, source.p.tolist()), grid, args.jobs)
    return t


def cmd_one_shot_verify(args, source: JointSource):
    family = parse_family(_need(args.family, "--family"), source, args.seed)
    reports = oneshot.verify(source, family, args.s, args.c)
    cols = list(oneshot.REPORT_COLUMNS) + ["member"]
    t = Table(cols, meta={"summary": oneshot.summarize(reports)})
    for r in reports:
        t.rows.append(
            {"lemma": r.lemma, "kind": r.kind, "s": r.s, "c": r.c, "epsilon": r.epsilon, "M": r.m,
             "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "status": r.status, "member": r.member}
        )
    violated = any(r.status == "violated" for r in reports)
    reported = any(r.status == "reported" for r in reports)
    code = EXIT_VIOLATION if violated or (args.strict and reported) else EXIT_OK
    return t, code


def cmd_spectrum(args, source: JointSource) -> Table:
    ns = [int(n) for n in _need(args.n, "--n")]
    rs = _need(args.r_grid, "--r-grid")
    t = Table(list(spectrum.SPECTRUM_COLUMNS), nats=["r"])
    t.rows = spectrum.spectrum_rows(source, ns, rs)
    return t


COMMANDS = {
    "measures": cmd_measures,
    "equivocation": cmd_equivocation,
    "exponents": cmd_exponents,
    "second-order": cmd_second_order,
    "one-shot-verify": cmd_one_shot_verify,
    "spectrum": cmd_spectrum,
}


def _need(value, flag):
    if value is None:
        raise InputError(f"{flag} is required for this command")
    return value


# ------------------------------------------------------------------- driver


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", default="canon", help="JSON/CSV joint matrix, or 'canon'")
    p.add_argument("--s", type=_typed(parse_list), default=[0.5], help="comma-separated offsets s")
    p.add_argument("--r-grid", type=_typed(parse_grid), help="rates LO:HI:STEP in nats")
    p.add_argument("--l-grid", type=_typed(parse_grid), help="second-order rates LO:HI:STEP")
    p.add_argument("--family", help="all:M | toeplitz:IN:OUT[:K] | family JSON")
    p.add_argument("--c", type=_typed(parse_list), default=[1.01, 1.5, 3.0], help="thresholds c for one-shot bounds")
    p.add_argument("--n", type=_typed(parse_list), help="block lengths for spectrum")
    p.add_argument("--units", choices=("nats", "bits"), default="nats")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="nonzero exit on reported (non-asserted) bound failures")


def _typed(fn):
    def wrapped(text):
        try:
            return fn(text)
        except InputError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    wrapped.__name__ = fn.__name__
    return wrapped


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="equivocation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    sw = sub.add_parser("sweep", help="run a batch of commands from a JSON config")
    sw.add_argument("config")
    return parser


def run(argv: list[str]) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        return run_sweep(args.config)
    try:
        source = read_source(args.source)
        result = COMMANDS[args.command](args, source)
    except (InputError, EquivocationError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    table, code = result if isinstance(result, tuple) else (result, EXIT_OK)
    emit(render(table, args.units, args.format), args.out)
    if code == EXIT_VIOLATION:
        print("one-shot bound violation; see report", file=sys.stderr)
    return code


def config_to_argv(entry: dict) -> list[str]:
    """``{"command": "exponents", "s": "0,0.5", "strict": true}`` -> argv."""
    entry = dict(entry)
    argv = [entry.pop("command")]
    for key, value in entry.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif value is not False and value is not None:
            text = ",".join(map(str, value)) if isinstance(value, list) else str(value)
            argv.append(f"{flag}={text}")  # "=" keeps negative grids from parsing as options
    return argv


def run_sweep(config: str) -> int:
    try:
        runs = json.loads(Path(config).read_text())["runs"]
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: bad sweep config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    worst = EXIT_OK
    for entry in runs:
        argv = entry if isinstance(entry, list) else config_to_argv(entry)
        try:
            code = run(argv)
        except SystemExit as exc:  # argparse failures inside a batch
            code = int(exc.code or 0)
        worst = max(worst, code)
    return worst


def main(argv: list[str] | None = None) -> None:
    try:
        code = run(sys.argv[1:] if argv is None else argv)
    except BrokenPipeError:  # output piped into e.g. head
        sys.stderr.close()
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
