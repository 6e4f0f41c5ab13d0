"""Command line front end.

Every command prints one JSON document (sorted keys) or a short text
rendering.  Failures print ``{"error": ..., "message": ...}`` on stderr and
exit with the code attached to the exception class.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import blocks as blk
from . import constructions as con
from . import diophantine as dio
from . import sequences as seq
from .errors import ExactUnavailable, InvalidParams, MorphicError, SpecError, SpecNotFound, UsageError
from .linalg import decimal_str, fraction_str, matrix_from_json
from .words import Alphabet, Coding, CodedStream, MorphicSpec, RawStream, load_spec, spec_to_document, word_stream

MAX_NATIVE = 2**53


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_input(p, indices: bool = False):
    src = p.add_argument_group("input (exactly one)")
    src.add_argument("--spec", help="JSON spec document")
    src.add_argument("--raw", help="literal finite word, one character per symbol")
    src.add_argument("--construct", help="built-in word: perron:MU, rational:P,Q, remark2:MU,S,T, thue-morse")
    if indices:
        src.add_argument("--indices", help="file of increasing one-positions (whitespace or comma separated)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=None,
                        help="output format (gen defaults to text, everything else to json)")
    common.add_argument("--seed-spec", dest="seed_spec", help="override the seed letter of the spec")
    common.add_argument("--horizon", type=int, default=blk.DEFAULT_HORIZON, help="longest block accepted before InfiniteBlock")
    common.add_argument("--tol", type=Fraction, default=Fraction(1, 10**12), help="tolerance for certified intervals")

    parser = _Parser(prog="morphic-blocks", description="Maximal blocks in morphic words and their exponents.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="print a prefix of the word")
    _add_input(g)
    g.add_argument("--length", type=int, default=64)
    g.add_argument("--concat", action="store_true", help="no separators between symbols")

    for name, helptext in (("blocks", "list maximal blocks"), ("limsup", "limsup of j_k/i_k")):
        b = sub.add_parser(name, parents=[common], help=helptext)
        _add_input(b)
        pat = b.add_mutually_exclusive_group(required=True)
        pat.add_argument("--delta", help="comma separated block letters")
        pat.add_argument("--x", help="x-block pattern (comma separated, or one character per symbol)")
        b.add_argument("--count", type=int, help="stop after this many blocks")
        b.add_argument("--symbols", type=int, default=100_000, help="scan this many letters")
        if name == "limsup":
            b.add_argument("--mode", choices=("auto", "exact", "empirical"), default="auto")
            b.add_argument("--window", type=int, default=blk.DEFAULT_WINDOW)

    c = sub.add_parser("construct", parents=[common], help="build a witness word")
    c.add_argument("kind", choices=("perron", "rational", "remark2", "thue-morse"))
    c.add_argument("--mu", type=int)
    c.add_argument("--matrix", help="JSON file holding a square nonnegative integer matrix")
    c.add_argument("--p", type=int)
    c.add_argument("--q", type=int)
    c.add_argument("--s", type=int, default=0)
    c.add_argument("--t", type=int, default=0)
    c.add_argument("--ones", type=int, default=con.DEFAULT_ONES, help="number of one-positions to report")
    c.add_argument("--kernel-depth", type=int, help="also enumerate the p-kernel (rational only)")
    c.add_argument("--out", help="write the morphism document here")

    e = sub.add_parser("exponent", parents=[common], help="v_b and μ of Σ b^-n over the one-positions")
    _add_input(e, indices=True)
    e.add_argument("--base", type=int, default=2)
    e.add_argument("--digits", type=int, default=dio.DEFAULT_DIGITS)
    e.add_argument("--J", type=int, help="number of one-positions used for μ")
    e.add_argument("--cf", action="store_true", help="add the continued-fraction cross-check")

    a = sub.add_parser("analyze", parents=[common], help="blocks + limsup + exponent in one report")
    _add_input(a)
    a.add_argument("--delta", required=True)
    a.add_argument("--count", type=int, default=20)
    a.add_argument("--symbols", type=int, default=100_000)
    a.add_argument("--base", type=int, default=2)
    a.add_argument("--digits", type=int, default=dio.DEFAULT_DIGITS)
    return parser


# ---------------------------------------------------------------------------
# inputs


def _split_symbols(text: str) -> list:
    return text.split(",") if "," in text else list(text)


def _parse_construct(text: str):
    kind, _, rest = text.partition(":")
    args = [int(x) for x in rest.split(",") if x.strip()] if rest else []
    try:
        if kind == "perron":
            return con.perron_spec(args[0])
        if kind == "rational":
            return con.rational_word(args[0], args[1])
        if kind == "remark2":
            return con.remark2_spec(args[0], args[1], args[2])
        if kind == "thue-morse":
            return con.thue_morse_spec()
    except IndexError:
        raise InvalidParams(f"not enough parameters in --construct {text!r}") from None
    raise InvalidParams(f"unknown construction {kind!r}")


def _with_seed(spec: MorphicSpec, seed: str | None) -> MorphicSpec:
    if seed is None:
        return spec
    from .words import validate_spec

    return validate_spec(MorphicSpec(spec.morphism, spec.alphabet.index(seed), spec.coding))


def resolve_input(args):
    """Return ``(spec_or_None, stream)`` for the single input source given."""
    given = [k for k in ("spec", "raw", "construct", "indices") if getattr(args, k, None) is not None]
    if len(given) != 1:
        raise UsageError(f"give exactly one of --spec/--raw/--construct{'/--indices' if hasattr(args, 'indices') else ''}")
    if args.spec is not None:
        spec = _with_seed(load_spec(args.spec), args.seed_spec)
        return spec, word_stream(spec)
    if args.raw is not None:
        if not args.raw:
            raise SpecError("--raw word is empty")
        return None, RawStream.from_symbols(list(args.raw))
    if args.construct is not None:
        made = _parse_construct(args.construct)
        if isinstance(made, MorphicSpec):
            spec = _with_seed(made, args.seed_spec)
            return spec, word_stream(spec)
        if made.spec is not None:
            spec = _with_seed(made.spec, args.seed_spec)
            return spec, word_stream(spec)
        return None, made.stream
    path = Path(args.indices)
    if not path.exists():
        raise SpecNotFound(f"index file {args.indices} not found")
    values = [int(x) for x in path.read_text().replace(",", " ").split()]
    return None, dio.IndexStream(values, getattr(args, "base", 2))


def _delta_letters(alphabet: Alphabet, text: str) -> frozenset:
    return frozenset(alphabet.index(s) for s in text.split(","))


def _digit_expansion(stream, base: int) -> dio.DigitExpansion:
    if isinstance(stream, dio.IndexStream):
        return dio.DigitExpansion(base, stream)
    syms = stream.alphabet.symbols
    try:
        values = [int(s) for s in syms]
    except ValueError:
        raise SpecError(f"symbols {list(syms)} are not base-{base} digits") from None
    if any(not 0 <= v < base for v in values):
        raise SpecError(f"symbols {list(syms)} are not base-{base} digits")
    if values == list(range(len(values))):
        return dio.DigitExpansion(base, stream)
    digits = Alphabet(tuple(str(d) for d in range(base)))
    return dio.DigitExpansion(base, CodedStream(stream, Coding(stream.alphabet, digits, tuple(values))))


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, float)):
        return obj
    if isinstance(obj, int):
        return obj if abs(obj) < MAX_NATIVE else str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, ensure_ascii=False, indent=2)


def _value_text(value: dict) -> str:
    if value.get("kind") == "interval":
        return f"[{value['lo']}, {value['hi']}] (~{value['decimal']})"
    if "exact" in value:
        return f"{value['exact']} (~{value['decimal']})" if value["exact"] != value["decimal"] else value["exact"]
    return f"~{value['decimal']}"


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args):
    _, stream = resolve_input(args)
    if args.length <= 0:
        raise UsageError("--length must be positive")
    letters = stream.chunk(0, args.length)
    text = stream.alphabet.render(letters, concat=args.concat)
    return {"prefix": text, "length": len(letters)}, text


def _scan(args, stream, spec=None):
    until = args.symbols if stream.length is None else stream.length
    if args.delta is not None:
        delta = _delta_letters(stream.alphabet, args.delta)
        if spec is not None:
            seq.check_no_terminal_block(spec, seq.pulled_back_delta(spec, delta))
        found = blk.scan_delta_blocks(stream, delta, count=args.count, until=until, horizon=args.horizon)
        return list(found), None
    pattern = blk.XBlockPattern(stream.alphabet.encode(_split_symbols(args.x)))
    found = blk.scan_x_blocks(stream, pattern, count=args.count, until=until, horizon=args.horizon)
    return list(found), pattern


def cmd_blocks(args):
    spec, stream = resolve_input(args)
    found, pattern = _scan(args, stream, spec)
    stats = blk.ratio_stats(found)
    out = {"blocks": blk.blocks_to_json(found), "stats": stats.to_dict(),
           "kind": "delta" if pattern is None else "x"}
    lines = [f"{b.k}\t{b.i}\t{b.j}" for b in found]
    if stats.max_ratio is not None:
        lines.append(f"max j/i = {fraction_str(stats.max_ratio)} (~{decimal_str(stats.max_ratio)})")
    return out, "\n".join(lines)


def cmd_limsup(args):
    spec, stream = resolve_input(args)
    budget = seq.Budget(prefix=args.symbols, horizon=args.horizon, tol=args.tol, window=args.window)
    if args.mode == "empirical" or spec is None:
        found, pattern = _scan(args, stream, spec)
        if pattern is not None:
            parts = blk.phase_partition(found, pattern)
            tails = [blk.ratio_stats(p, args.window).tail_estimate for p in parts]
            tails = [t for t in tails if t is not None]
            est = max(tails) if tails else Fraction(0)
        else:
            est = blk.ratio_stats(found, args.window).tail_estimate or Fraction(0)
        if args.mode == "exact":
            raise ExactUnavailable("an exact value needs a morphism document (--spec or --construct)")
        report = seq.LimsupReport("estimate", est, "empirical", stream.alphabet.size, "estimate-only",
                                  notes=[f"tail max over the last {args.window} blocks of {len(found)}"])
    elif args.delta is not None:
        report = seq.limsup_delta(spec, _delta_letters(spec.output_alphabet, args.delta), budget)
    else:
        report = seq.limsup_x(spec, spec.output_alphabet.encode(_split_symbols(args.x)), budget)
    if args.mode == "exact" and report.kind == "estimate":
        raise ExactUnavailable(f"only an estimate is available (method {report.method})")
    out = report.to_dict()
    text = f"{_value_text(out['value'])}\tmethod={report.method}\tclass={report.classification}"
    return out, text


def _read_matrix(path: str):
    p = Path(path)
    if not p.exists():
        raise SpecNotFound(f"matrix file {path} not found")
    try:
        return matrix_from_json(json.loads(p.read_text()))
    except (ValueError, TypeError) as exc:
        raise InvalidParams(f"matrix file {path}: {exc}") from None


def cmd_construct(args):
    if args.kind == "perron":
        if (args.mu is None) == (args.matrix is None):
            raise InvalidParams("construct perron needs exactly one of --mu / --matrix")
        report = con.perron_spec(args.mu if args.mu is not None else _read_matrix(args.matrix), args.ones, args.tol)
    elif args.kind == "rational":
        if args.p is None or args.q is None:
            raise InvalidParams("construct rational needs --p and --q")
        report = con.rational_word(args.p, args.q, args.ones)
    elif args.kind == "remark2":
        if (args.mu is None) == (args.matrix is None):
            raise InvalidParams("construct remark2 needs exactly one of --mu / --matrix")
        report = con.remark2_spec(args.mu if args.mu is not None else _read_matrix(args.matrix), args.s, args.t, args.ones)
    else:
        spec = con.thue_morse_spec()
        out = {"spec": spec_to_document(spec)}
        if args.out:
            Path(args.out).write_text(dumps(spec_to_document(spec)) + "\n")
        return out, dumps(spec_to_document(spec))
    out = report.to_dict()
    if args.kernel_depth is not None:
        if args.kind != "rational":
            raise InvalidParams("--kernel-depth applies to construct rational")
        out["kernel"] = con.p_kernel(report.stream, args.p, depth=args.kernel_depth).to_dict()
    if args.out:
        if report.spec is None:
            raise InvalidParams(f"construct {args.kind} yields a predicate word, not a morphism document")
        Path(args.out).write_text(dumps(spec_to_document(report.spec)) + "\n")
    text = "ones: " + " ".join(str(n) for n in report.ones) + f"\nclass C: {report.class_c}"
    return out, text


def _exponent(stream, base: int, digits: int, J: int | None, cf: bool, horizon: int):
    exp = _digit_expansion(stream, base)
    report = dio.exponent_report(exp, digits, J)
    out = report.to_dict()
    if cf:
        idx = [n for n in dio.ones_of(exp.stream, digits + 1)]
        depth = min(len(idx), J or 8)
        if depth >= 3:
            truncs = [dio.truncate_value(exp, k) for k in range(2, depth + 1)]
            out["cf"] = {"quotients": [str(a) for a in dio.continued_fraction(truncs[-1]).quotients[:40]],
                         **dio.mu_from_cf(truncs).to_dict()}
    return out


def cmd_exponent(args):
    _, stream = resolve_input(args)
    out = _exponent(stream, args.base, args.digits, args.J, args.cf, args.horizon)
    vb = out["v_b"] or {}
    mu = out["mu"] or {}
    text = f"v_b ~ {vb.get('tail')}\tmu ~ {mu.get('tail')}\tclass C: {out['class_C']}"
    return out, text


def cmd_analyze(args):
    spec, stream = resolve_input(args)
    if spec is not None:
        seq.check_no_terminal_block(spec, seq.pulled_back_delta(spec, _delta_letters(stream.alphabet, args.delta)))
    found = list(blk.scan_delta_blocks(stream, _delta_letters(stream.alphabet, args.delta), count=args.count,
                                       until=args.symbols if stream.length is None else stream.length,
                                       horizon=args.horizon))
    out = {"blocks": blk.blocks_to_json(found), "stats": blk.ratio_stats(found).to_dict()}
    if spec is not None:
        budget = seq.Budget(prefix=args.symbols, horizon=args.horizon, tol=args.tol)
        out["limsup"] = seq.limsup_delta(spec, _delta_letters(spec.output_alphabet, args.delta), budget).to_dict()
    try:
        out["exponent"] = _exponent(stream, args.base, args.digits, None, False, args.horizon)
    except SpecError as exc:
        out["exponent"] = {"skipped": str(exc)}
    lim = out.get("limsup")
    text = f"{len(found)} blocks" + (f"; limsup {_value_text(lim['value'])} ({lim['method']})" if lim else "")
    return out, text


COMMANDS = {"gen": cmd_gen, "blocks": cmd_blocks, "limsup": cmd_limsup, "construct": cmd_construct,
            "exponent": cmd_exponent, "analyze": cmd_analyze}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out, text = COMMANDS[args.command](args)
    except MorphicError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True, ensure_ascii=False), file=sys.stderr)
        return exc.exit_code
    fmt = args.format or ("text" if args.command == "gen" else "json")
    print(text if fmt == "text" else dumps(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
