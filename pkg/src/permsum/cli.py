"""Command-line interface: ``permsum <subcommand> [options]``.

Exit codes: 0 success, 2 input/parse error, 3 size cap or budget exceeded,
4 scan aborted after partial output.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from . import bounds as bnd
from .dist import (DP_CAP, ENUM_CAP, exact_distribution_dp, exact_distribution_enum,
                   exact_variance, max_point_mass)
from .energy import BRUTE_BUDGET, decimal_string, kappa_bruteforce, kappa_convolution, rnr_ratio
from .errors import CapExceededError, InvalidInputError, NoDiversityError, PermsumError
from .multiset import Multiset, decompose, format_rational, ln_decimal, multiplicity_profile
from .sampler import SampleConfig, estimate_q
from .scan import FAMILIES, CsvSink, family_instance, rows_for

EXIT_OK, EXIT_PARSE, EXIT_CAP, EXIT_SCAN = 0, 2, 3, 4


class ScanAborted(PermsumError):
    pass


def load_multiset(arg: str | None, flag: str) -> Multiset:
    """Inline JSON (starts with '{'), '-' for stdin, or a file path."""
    if arg is None:
        raise InvalidInputError(f"{flag} is required")
    text = arg
    if not arg.lstrip().startswith("{"):
        if arg == "-":
            text = sys.stdin.read()
        else:
            try:
                text = Path(arg).read_text()
            except OSError as exc:
                raise InvalidInputError(f"{flag}: cannot read {arg}: {exc.strerror}") from None
    try:
        return Multiset.from_json(text)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{flag}: {exc}") from None


def parse_bounds(text: str | None, constant: str, epsilon: str, pinned: bool) -> list[bnd.BoundSpec]:
    kinds = list(bnd.BoundKind) if not text or text == "all" else []
    if not kinds:
        for name in text.split(","):
            name = name.strip().lower()
            try:
                kinds.append(bnd.BoundKind(name))
            except ValueError:
                choices = ", ".join(k.value for k in bnd.BoundKind)
                raise InvalidInputError(f"--bounds: unknown bound {name!r}; choose from {choices}") from None
    try:
        C, eps = Fraction(constant), Fraction(epsilon)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError("--constant and --epsilon must be rationals") from None
    return [bnd.BoundSpec(k, C, eps, pinned) for k in kinds]


def parse_n_range(text: str) -> range:
    """'3..12', '4..10:2' (step 2) or '' for an empty range."""
    if not text:
        return range(0)
    try:
        body, _, step = text.partition(":")
        lo, _, hi = body.partition("..")
        lo_i = int(lo)
        hi_i = int(hi) if hi else lo_i
        return range(lo_i, hi_i + 1, int(step) if step else 1)
    except ValueError:
        raise InvalidInputError(f"--n-range: expected LO..HI[:STEP], got {text!r}") from None


@contextmanager
def output_stream(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def emit(obj, args, csv_rows=None) -> None:
    with output_stream(args.out) as fh:
        if args.format == "csv" and csv_rows is not None:
            writer = csv.writer(fh, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
            writer.writerows(csv_rows)
        else:
            json.dump(obj, fh, indent=2)
            fh.write("\n")


# ------------------------------------------------------------------ engines


def compute_q(A: Multiset, B: Multiset, args) -> tuple[Fraction, dict]:
    """Dispatch on --method and caps; returns q and the JSON report."""
    method = args.method
    n = A.n
    if method == "exact":
        method = "enum" if n <= args.enum_cap else "dp"
    try:
        if method == "enum":
            dist = exact_distribution_enum(A, B, cap=args.enum_cap, workers=args.workers)
        elif method == "dp":
            dist = exact_distribution_dp(A, B, cap=args.dp_cap)
        else:
            dist = None
    except CapExceededError:
        if not args.mc_fallback:
            raise
        method, dist = "mc", None
    if dist is not None:
        rep = max_point_mass(dist)
        return rep.q, {"method": method, "n": n, **rep.to_obj()}
    est = estimate_q(A, B, SampleConfig(args.seed, args.samples, args.workers))
    return est.q_hat, {"method": "mc", "n": n, **est.to_obj()}


def compute_dist(A: Multiset, B: Multiset, args):
    method = args.method
    if method == "mc":
        raise InvalidInputError("dist is exact only; use 'q --method mc' for sampling")
    if method == "exact":
        method = "enum" if A.n <= args.enum_cap else "dp"
    if method == "enum":
        return exact_distribution_enum(A, B, cap=args.enum_cap, workers=args.workers)
    return exact_distribution_dp(A, B, cap=args.dp_cap)


# ------------------------------------------------------------------ commands


def cmd_profile(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    prof = multiplicity_profile(A)
    obj = {"n": prof.n, "parts": list(prof.parts), "distinct": prof.length, "M": str(prof.M)}
    emit(obj, args, [["n", "distinct", "M", "parts"],
                     [prof.n, prof.length, str(prof.M), " ".join(map(str, prof.parts))]])
    return EXIT_OK


def cmd_dist(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    B = load_multiset(args.input_b, "--input-b")
    dist = compute_dist(A, B, args)
    rows = [["value", "count"]] + [[format_rational(v), str(dist.atoms[v])] for v in sorted(dist.atoms)]
    emit(dist.to_obj(), args, rows)
    return EXIT_OK


def cmd_q(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    B = load_multiset(args.input_b, "--input-b")
    _, obj = compute_q(A, B, args)
    emit(obj, args, [list(obj.keys()), [json.dumps(v) if isinstance(v, list) else v for v in obj.values()]])
    return EXIT_OK


def cmd_var(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    B = load_multiset(args.input_b, "--input-b")
    var = exact_variance(A, B)
    MA, MB = multiplicity_profile(A).M, multiplicity_profile(B).M
    obj = {"n": A.n, "variance": format_rational(var), "variance_decimal": decimal_string(var),
           "M_A": str(MA), "M_B": str(MB)}
    if MA and MB:
        scaled = var * A.n / (MA * MB)
        obj["var_n_over_MAMB"] = format_rational(scaled)
        obj["var_n_over_MAMB_decimal"] = decimal_string(scaled)
    emit(obj, args, [list(obj.keys()), list(obj.values())])
    return EXIT_OK


def cmd_energy(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    B = load_multiset(args.input_b, "--input-b")
    try:
        c = [int(x) for x in args.c.split(",")]
    except ValueError:
        raise InvalidInputError(f"--c: expected comma-separated integers, got {args.c!r}") from None
    if args.method == "convolution":
        if args.distinct:
            raise InvalidInputError("--distinct needs --method brute")
        rep = kappa_convolution(A, B, c, budget=args.budget)
    else:
        rep = kappa_bruteforce(A, B, c, distinct=args.distinct, budget=args.budget)
    obj = rep.to_obj()
    if args.rnr:
        obj["rnr"] = rnr_ratio(A, B).to_obj()
    emit(obj, args, [list(obj.keys()), [json.dumps(v) if isinstance(v, (list, dict)) else v
                                        for v in obj.values()]])
    return EXIT_OK


def cmd_decompose(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    d = decompose(A)
    M = multiplicity_profile(A).M
    check = Decimal(d.m * d.r**3) * ln_decimal(A.n)
    obj = {"n": A.n, "M": str(M), "m": d.m, "r": d.r, "index": d.index,
           "witness": [format_rational(v) for v in d.witness],
           "m_r3_ln_n": format(+check.quantize(Decimal("1e-12")), "f")}
    emit(obj, args, [list(obj.keys()), [json.dumps(v) if isinstance(v, list) else v
                                        for v in obj.values()]])
    return EXIT_OK


def cmd_verify(args) -> int:
    A = load_multiset(args.input_a, "--input-a")
    B = load_multiset(args.input_b, "--input-b")
    specs = parse_bounds(args.bounds, args.constant, args.epsilon, args.pin)
    q, qobj = compute_q(A, B, args)
    verdicts = [bnd.evaluate(s, A, B, q) for s in specs]
    if args.format == "csv":
        with output_stream(args.out) as fh:
            CsvSink(fh).write(rows_for("custom", A, B, q, qobj["method"], specs))
        return EXIT_OK
    emit({"n": A.n, "q": qobj, "verdicts": [v.to_obj() for v in verdicts]}, args)
    return EXIT_OK


def _scan_instances(args) -> list:
    """Build every instance up front so bad input exits 2 before any row is written."""
    if args.family == "custom-list":
        if not args.instances:
            raise InvalidInputError("custom-list needs --instances PATH")
        try:
            items = json.loads(Path(args.instances).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"--instances: {exc}") from None
        if not isinstance(items, list):
            raise InvalidInputError("--instances: expected a JSON list of {\"A\":..., \"B\":...}")
        out = []
        for i, item in enumerate(items):
            try:
                out.append((Multiset.from_obj(item["A"]), Multiset.from_obj(item["B"])))
            except (KeyError, TypeError, InvalidInputError) as exc:
                raise InvalidInputError(f"--instances[{i}]: {exc}") from None
        return out
    return [family_instance(args.family, n, args.block) for n in parse_n_range(args.n_range)]


def cmd_scan(args) -> int:
    args.format = args.format or "csv"
    specs = parse_bounds(args.bounds, args.constant, args.epsilon, args.pin)
    family = "custom" if args.family == "custom-list" else args.family
    instances = _scan_instances(args)
    with output_stream(args.out) as fh:
        if args.format == "json":
            rows = []
            for A, B in instances:
                q, qobj = compute_q(A, B, args)
                rows.extend(rows_for(family, A, B, q, qobj["method"], specs))
            json.dump([dict(zip(("n", "family", "M_A", "M_B", "Q_exact", "bound_kind",
                                 "bound_value", "ratio", "status", "q_method"), r.as_list()))
                       for r in rows], fh, indent=2)
            fh.write("\n")
            return EXIT_OK
        sink = CsvSink(fh)
        try:
            for A, B in instances:
                q, qobj = compute_q(A, B, args)
                sink.write(rows_for(family, A, B, q, qobj["method"], specs))
        except PermsumError as exc:
            fh.flush()
            raise ScanAborted(f"scan aborted: {exc}") from exc
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    io_opts = argparse.ArgumentParser(add_help=False)
    io_opts.add_argument("--input-a", help="multiset A: JSON file, '-' or inline {\"values\": [...]}")
    io_opts.add_argument("--input-b", help="multiset B, same forms as --input-a")
    io_opts.add_argument("--format", choices=("json", "csv"),
                         help="default json (csv for scan)")
    io_opts.add_argument("--out", help="output path (default stdout)")

    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--method", choices=("exact", "dp", "mc"), default="exact",
                        help="exact: enumeration up to --enum-cap, else DP; dp: DP; mc: sampling")
    engine.add_argument("--seed", type=int, default=0)
    engine.add_argument("--samples", type=int, default=100_000)
    engine.add_argument("--enum-cap", type=int, default=ENUM_CAP)
    engine.add_argument("--dp-cap", type=int, default=DP_CAP)
    engine.add_argument("--workers", type=int, default=1)
    engine.add_argument("--mc-fallback", action="store_true",
                        help="sample instead of failing when an exact cap is exceeded")

    bound_opts = argparse.ArgumentParser(add_help=False)
    bound_opts.add_argument("--bounds", default="all",
                            help="comma-separated: " + ",".join(k.value for k in bnd.BoundKind))
    bound_opts.add_argument("--constant", default="1", help="constant C for asymptotic bounds")
    bound_opts.add_argument("--epsilon", default="1/10", help="epsilon in M(A)M(B) >= n^(3+eps)")
    bound_opts.add_argument("--pin", action="store_true",
                            help="assert asymptotic bounds with the given constant")

    p = argparse.ArgumentParser(prog="permsum", description=(
        "Exact anticoncentration of permutation sums sum_i a_i b_pi(i)."))
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("profile", parents=[io_opts], help="multiplicity profile and M")
    sp.set_defaults(func=cmd_profile)
    sp = sub.add_parser("dist", parents=[io_opts, engine], help="exact distribution")
    sp.set_defaults(func=cmd_dist)
    sp = sub.add_parser("q", parents=[io_opts, engine], help="max point mass Q")
    sp.set_defaults(func=cmd_q)
    sp = sub.add_parser("var", parents=[io_opts], help="exact variance")
    sp.set_defaults(func=cmd_var)
    sp = sub.add_parser("energy", parents=[io_opts], help="kappa_c and K_c")
    sp.add_argument("--c", default="1,-1", help="coefficient tuple, e.g. 1,-1 or 1,2,-1")
    sp.add_argument("--method", choices=("convolution", "brute"), default="convolution")
    sp.add_argument("--distinct", action="store_true", help="K'_c (distinct indices), brute only")
    sp.add_argument("--budget", type=int, default=BRUTE_BUDGET)
    sp.add_argument("--rnr", action="store_true", help="also report the kappa_{1,-1} log ratio")
    sp.set_defaults(func=cmd_energy)
    sp = sub.add_parser("decompose", parents=[io_opts], help="m copies of an r-set")
    sp.set_defaults(func=cmd_decompose)
    sp = sub.add_parser("verify", parents=[io_opts, engine, bound_opts], help="check bounds on A, B")
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("scan", parents=[io_opts, engine, bound_opts], help="bound table over a family")
    sp.add_argument("--family", choices=FAMILIES, default="uniform_grid")
    sp.add_argument("--n-range", default="3..10", help="LO..HI[:STEP]; empty for no rows")
    sp.add_argument("--block", type=int, default=1, help="staircase step size")
    sp.add_argument("--instances", help="JSON list of {\"A\":..., \"B\":...} for custom-list")
    sp.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ScanAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCAN
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InvalidInputError, NoDiversityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
