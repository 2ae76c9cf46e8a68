"""Command-line front end.

Every command prints one JSON document (sorted keys, with the parsed
configuration and library version embedded), or CSV/DOT where a command
supports it.  Exit status: 0 on success, 2 for bad input, 3 when an
internal consistency check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .algebraic import make_field, is_pisot, render
from .beta_expansion import (
    BetaBase,
    approximate_dyadic,
    as_word,
    dyadic_value,
    expand,
    make_base,
    value,
    word_str,
)
from .errors import BetaShiftError, InputError, InvariantViolation, NotAdmissible, OutOfRange
from .martingales import (
    check_fairness,
    constant_martingale,
    construct_case1,
    construct_case2,
    construct_sofic_nosync,
    construct_sofic_sync,
    detect_deviant_block,
    longest_prefix_seen,
    savings_transform,
)
from .measures import (
    edge_measure,
    freq_profile,
    geometric_checkpoints,
    markov_order,
    parry_markov,
    parry_measure,
    sample_parry,
)
from .shift_automaton import minimal_forbidden_words, synchronizing_word
from .transfer import BinaryMartingale, InducedMeasure

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3


# ---------------------------------------------------------------------------
# input helpers


def parse_number(text: str) -> Fraction:
    try:
        x = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {text!r}") from exc
    if not 0 <= x < 1:
        raise OutOfRange("number must satisfy 0 <= x < 1")
    return x


def parse_bits(text: str) -> tuple[int, ...]:
    if text in ("", "-", "e"):
        return ()
    w = as_word(text)
    if any(d not in (0, 1) for d in w):
        raise InputError(f"not a binary word: {text!r}")
    return w


def read_digit_file(path: str) -> tuple[str | None, tuple[int, ...]]:
    """Digits from a one-line file with an optional '# base: <poly>' header."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    poly = None
    digits = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("base:"):
                poly = body[len("base:") :].strip()
            continue
        digits.append(line)
    text = "".join(digits)
    if not text.isdigit():
        raise InputError("digit file must contain a single line of ASCII digits")
    return poly, as_word(text)


def parse_checkpoints(text: str | None, limit: int) -> list[int]:
    if not text or text == "geometric":
        return geometric_checkpoints(limit)
    try:
        pts = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError as exc:
        raise InputError(f"bad checkpoint list {text!r}") from exc
    if not pts or pts[0] < 1:
        raise InputError("checkpoints must be positive integers")
    return [p for p in pts if p <= limit] or [limit]


def parse_word_list(text: str | None) -> tuple[int, ...]:
    if text is None:
        raise InputError("missing word argument")
    if "," in text:
        return tuple(int(x) for x in text.split(","))
    return as_word(text)


def load_base(poly: str | None) -> BetaBase:
    if not poly:
        raise InputError("--poly is required")
    return make_base(poly)


def digit_source(args, base: BetaBase) -> tuple[tuple[int, ...], dict]:
    """Digits from --digits-file, --number (with --count) or --sample (with --seed)."""
    count = args.count
    if args.digits_file:
        poly, digits = read_digit_file(args.digits_file)
        if poly and make_field(poly).poly != base.poly:
            raise InputError("digit file header names a different base")
        source = {"kind": "file", "path": args.digits_file}
    elif args.number is not None:
        x = parse_number(args.number)
        exp = expand(base, x, count)
        digits = exp.digits
        source = {"kind": "number", "number": str(x), "cycle": _cycle_json(exp.cycle)}
    elif args.sample is not None:
        digits = sample_parry(base, args.sample, args.seed)
        source = {"kind": "parry-sample", "length": args.sample, "seed": args.seed}
    else:
        raise InputError("one of --digits-file, --number or --sample is required")
    if base.dfa.run(digits) is None:
        q = base.dfa.initial
        for pos, d in enumerate(digits):
            q = base.dfa.step(q, d)
            if q is None:
                raise NotAdmissible(f"digit sequence leaves the beta-shift at position {pos}")
    return tuple(digits), source


def _cycle_json(cycle):
    if cycle is None:
        return None
    return {"pre": word_str(cycle[0]), "period": word_str(cycle[1])}


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func",):
            continue
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_base(args) -> dict:
    if not args.poly:
        raise InputError("--poly is required")
    field = make_field(args.poly)
    if not is_pisot(field):
        return {"poly": str(field.poly), "pisot": False, "beta": render(field.beta)}
    base = make_base(field.poly)
    rho, node = synchronizing_word(base.graph)
    span = base.m + base.n
    report = {
        "poly": str(base.poly),
        "pisot": True,
        "beta": render(base.beta),
        "alphabet": list(base.alphabet),
        "s_beta": {"pre": word_str(base.pre), "period": word_str(base.period)},
        "raw_expansion": None if base.raw_expansion is None else word_str(base.raw_expansion),
        "finite_type": base.raw_expansion is not None,
        "forbidden": minimal_forbidden_words(base, span + 1),
        "dfa": base.dfa.to_json(),
        "presentation": base.graph.to_json(),
        "synchronizing_word": {"word": word_str(rho), "node": node},
    }
    if args.format == "dot":
        return {"_text": base.dfa.to_dot("beta_dfa") + "\n" + base.graph.to_dot("presentation") + "\n"}
    return report


def cmd_expand(args) -> dict:
    base = load_base(args.poly)
    if args.number is None:
        raise InputError("--number is required")
    x = parse_number(args.number)
    exp = expand(base, x, args.count)
    return {"poly": str(base.poly), "number": str(x), "digits": word_str(exp.digits), "cycle": _cycle_json(exp.cycle),
            "value_of_prefix": render(value(base, exp.digits))}


def analyze(base: BetaBase, digits: Sequence[int], k: int, delta, checkpoints: Sequence[int] | None = None,
            fairness_depth: int = 6) -> dict:
    """Frequency report, deviant-block search and, if one is found, a strategy run on the digits."""
    digits = tuple(digits)
    N = len(digits)
    cps = list(checkpoints) if checkpoints else geometric_checkpoints(N)
    pm = parry_measure(base)
    profile = freq_profile(digits, k, pm, base)
    order = markov_order(base)
    report: dict = {"base": str(base.poly), "N": N, "k": k, "delta": str(delta), "profile": profile.to_json()}
    if order is not None:
        report["route"] = "markov"
        P = parry_markov(base, order)
        witness = detect_deviant_block(digits, P, max(k, order), delta, min_length=order)
        mart = None
        if witness is not None:
            mart = construct_case1(P, witness.sigma, witness.b, witness.delta)
        measure = P
    else:
        report["route"] = "sofic"
        graph = base.graph
        rho, node = synchronizing_word(graph)
        chain = edge_measure(base)
        start = next((i + len(rho) for i in range(N - len(rho) + 1) if digits[i : i + len(rho)] == rho), None)
        witness = mart = None
        if start is not None:
            edges = []
            v = node
            for d in digits[start:]:
                e = graph.follow(v, d)
                edges.append(e.index)
                v = e.dest
            witness = detect_deviant_block(edges, chain, k, delta)
            if witness is not None:
                edge_mart = construct_case1(chain, witness.sigma, witness.b, witness.delta)
                mart = construct_sofic_sync(graph, edge_mart, rho)
        report["synchronizing_word"] = word_str(rho)
        measure = pm
    report["deviant"] = witness is not None
    report["witness"] = None if witness is None else witness.to_json()
    if mart is not None:
        traj = mart.run(digits, cps)
        fair = check_fairness(mart, measure, fairness_depth)
        saver = savings_transform(mart)
        srun = saver.run(digits, cps)
        report["martingale"] = {
            "name": mart.name,
            "params": {k2: str(v) for k2, v in sorted(mart.params.items())},
            "factors": sorted(render(f)["decimal"] for f in mart.factor_values()),
            "trajectory": traj.to_json()["checkpoints"],
            "final_capital_log2": traj.final[1],
            "fairness": fair.to_json(),
        }
        report["savings"] = [{"N": n, "capital": c, "saved": s} for n, c, s in srun]
    return report


def cmd_analyze(args) -> dict:
    base = load_base(args.poly)
    digits, source = digit_source(args, base)
    delta = Fraction(args.delta) if args.delta else Fraction(1, 5)
    cps = parse_checkpoints(args.checkpoints, len(digits))
    report = analyze(base, digits, args.k, delta, cps)
    report["source"] = source
    return report


def build_martingale(args, base: BetaBase):
    """The strategy named by --construction together with the measure it is fair against."""
    kind = args.construction
    delta = Fraction(args.delta) if args.delta else Fraction(1, 2)
    if kind in ("case1", "case2"):
        order = args.order or markov_order(base)
        if order is None:
            raise InputError("digit-level constructions need a finite-type base; use sync or nosync")
        P = parry_markov(base, order)
        if kind == "case1":
            return construct_case1(P, parse_word_list(args.sigma), int(args.b), delta), P
        return construct_case2(P, parse_word_list(args.sigma), parse_word_list(args.rho), delta), P
    graph = base.graph
    chain = edge_measure(base)
    if kind == "sync":
        edge_mart = construct_case1(chain, parse_word_list(args.sigma), int(args.b), delta)
        rho = parse_word_list(args.rho) if args.rho else synchronizing_word(graph)[0]
        return construct_sofic_sync(graph, edge_mart, rho), parry_measure(base)
    if kind == "nosync":
        alpha = parse_word_list(args.alpha) if args.alpha else synchronizing_word(graph)[0]
        dstar = Fraction(args.delta_star) if args.delta_star else Fraction(1, 2)
        n_alpha = args.n_alpha if args.n_alpha is not None else 0
        return construct_sofic_nosync(graph, chain, alpha, dstar, n_alpha), parry_measure(base)
    if kind == "constant":
        return constant_martingale(base.dfa), parry_measure(base)
    raise InputError(f"unknown construction {kind!r}")


def cmd_martingale(args) -> dict:
    base = load_base(args.poly)
    mart, measure = build_martingale(args, base)
    if args.format == "dot":
        return {"_text": mart.automaton.to_dot("martingale") + "\n"}
    report = {"martingale": mart.to_json(), "fairness": check_fairness(mart, measure, args.depth).to_json()}
    if args.number is not None or args.digits_file or args.sample is not None:
        digits, source = digit_source(args, base)
        if args.construction == "nosync" and args.n_alpha is None:
            report["n_alpha_scan"] = longest_prefix_seen(mart.params["alpha"], digits, len(digits) // 2)
        traj = mart.run(digits, parse_checkpoints(args.checkpoints, len(digits)))
        if args.format == "csv":
            return {"_text": traj.to_csv()}
        report["trajectory"] = traj.to_json()
        report["source"] = source
    return report


def cmd_convert(args) -> dict:
    base = load_base(args.poly)
    bits = parse_bits(args.number or "")
    tau = approximate_dyadic(base, bits, args.prec)
    err = abs(value(base, tau) - dyadic_value(bits))
    bound = Fraction(1, 1 << args.prec)
    if err > bound:
        raise InvariantViolation("approximation misses its error bound")
    return {"poly": str(base.poly), "input": word_str(bits), "prec": args.prec, "word": word_str(tau),
            "length": len(tau), "error": render(err), "bound": str(bound), "certified": True}


def _induced(args, base: BetaBase) -> InducedMeasure:
    if args.construction in (None, "constant"):
        return InducedMeasure(constant_martingale(base.dfa), base)
    mart, _ = build_martingale(args, base)
    return InducedMeasure(savings_transform(mart), base)


def cmd_transfer(args) -> dict:
    base = load_base(args.poly)
    induced = _induced(args, base)
    if args.what == "cdf":
        if args.at is None:
            raise InputError("--at is required")
        val, rad = induced.cdf_dyadic(parse_bits(args.at), args.prec)
        return {"value": str(val), "value_decimal": format(float(val), ".12g"), "radius": str(rad)}
    if args.tau is None:
        raise InputError("--tau is required")
    val, rad = BinaryMartingale(induced)(parse_bits(args.tau), args.prec)
    return {"value": str(val), "value_decimal": format(float(val), ".12g"), "radius": str(rad)}


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--poly", help='minimal polynomial, e.g. "x^2-x-1"')
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv", "dot"), default="json")


def _source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--number", help="rational p/q in [0, 1)")
    p.add_argument("--digits-file", help="file with one line of digits")
    p.add_argument("--sample", type=int, help="draw this many Parry-distributed digits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1000, help="digits to expand from --number")
    p.add_argument("--checkpoints", help='comma list, or "geometric"')


def _construction(p: argparse.ArgumentParser) -> None:
    p.add_argument("--construction", choices=("case1", "case2", "sync", "nosync", "constant"))
    p.add_argument("--sigma")
    p.add_argument("--b")
    p.add_argument("--rho")
    p.add_argument("--alpha")
    p.add_argument("--delta")
    p.add_argument("--delta-star")
    p.add_argument("--n-alpha", type=int)
    p.add_argument("--order", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betashift", description="Beta-expansions, Parry measure and betting strategies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("base", help="expansion of 1, automaton and presentation of a base")
    _common(p)
    p.set_defaults(func=cmd_base)

    p = sub.add_parser("expand", help="greedy expansion of a rational")
    _common(p)
    _source(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("analyze", help="block frequencies, deviant blocks and an automatic strategy")
    _common(p)
    _source(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--delta")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("martingale", help="build a strategy, check fairness, optionally run it")
    _common(p)
    _source(p)
    _construction(p)
    p.add_argument("--depth", type=int, default=8)
    p.set_defaults(func=cmd_martingale)

    p = sub.add_parser("convert", help="approximate a dyadic rational in base beta")
    _common(p)
    p.add_argument("--number", help="binary digits of the dyadic rational")
    p.add_argument("--prec", type=int, default=16)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("transfer", help="distribution function and binary strategy of an induced measure")
    p.add_argument("what", choices=("cdf", "mart"))
    _common(p)
    _construction(p)
    p.add_argument("--at", help="binary digits of a dyadic point")
    p.add_argument("--tau", help="binary word")
    p.add_argument("--prec", type=int, default=16)
    p.set_defaults(func=cmd_transfer)
    return parser


def _validate(args) -> None:
    if getattr(args, "prec", 1) < 1:
        raise InputError("--prec must be at least 1")
    if getattr(args, "k", 1) < 1:
        raise InputError("--k must be at least 1")
    if getattr(args, "count", 1) < 1:
        raise InputError("--count must be at least 1")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        result = args.func(args)
    except InvariantViolation as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_INVARIANT
    except BetaShiftError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_INPUT
    if "_text" in result:
        text = result["_text"]
    else:
        doc = {"command": args.command, "config": _config(args), "version": __version__, "result": result}
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
