"""Command-line interface: ``tpc {compress,decompress,simulate,bound,kraft}``.

Data goes to files or standard output; diagnostics go to standard error.
Exit status is 0 on success, 1 on a reported error, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional

from . import coder
from .alphabet import SourceSpec, SourceError
from .escape import EscapePredictor, theorem2_check
from .estimators import LAPLACE, EstimatorError, from_name
from .predictors import PredictorSpecError, make_predictor
from .prefix_code import (CodeError, LazyCodeTreePredictor, code_from_dict, code_tree_bound,
                          expected_codeword_length, kraft_check, theorem3_decay)
from .redundancy import RedundancyReport, ReportRow, cumulative_redundancy, redundancy_table
from .tree import PredictorTree, TreeError, build_flat, from_nested, theorem1_bound, theorem1_terms

_TOKEN = re.compile(r"\S+|\s+")


class CliError(Exception):
    pass


def _load_json(value: str, what: str):
    """Inline JSON, or the path of a JSON file."""
    text = value.strip()
    if not text.startswith(("{", "[")):
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise CliError(f"cannot read {what} file {value!r}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{what}: malformed JSON ({exc})") from exc


def _source_doc(value: str) -> dict:
    kind, _, arg = value.partition(":")
    if kind == "uniform" and arg:
        return {"kind": "uniform", "size": int(arg)}
    if kind == "geometric" and arg:
        return {"kind": "geometric", "ratio": float(arg)}
    return _load_json(value, "source")


def _code_doc(value: str) -> dict:
    if value in ("unary", "elias-gamma"):
        return {"rule": value}
    return _load_json(value, "code")


# -- token handling ------------------------------------------------------------

def tokenize(data: bytes, mode: str) -> tuple[list[int], dict]:
    """Map file contents to letter ids; returns ``(letters, token header)``."""
    if mode == "bytes":
        return list(data), {"mode": "bytes"}
    text = data.decode("utf-8")
    if mode == "ids":
        try:
            ids = [int(tok) for tok in text.split()]
        except ValueError as exc:
            raise CliError(f"unmappable token: {exc}") from exc
        if any(a < 0 for a in ids):
            raise CliError("letter ids must be non-negative")
        return ids, {"mode": "ids"}
    if mode == "words":
        index: dict[str, int] = {}
        letters = [index.setdefault(tok, len(index)) for tok in _TOKEN.findall(text)]
        return letters, {"mode": "words", "dictionary": list(index)}
    raise CliError(f"unknown token mode {mode!r}")


def detokenize(letters: list[int], head: dict) -> bytes:
    mode = head.get("mode")
    if mode == "bytes":
        return bytes(letters)
    if mode == "ids":
        return (" ".join(map(str, letters)) + "\n").encode() if letters else b""
    if mode == "words":
        vocab = head.get("dictionary", [])
        try:
            return "".join(vocab[a] for a in letters).encode("utf-8")
        except IndexError as exc:
            raise coder.DecodeError("letter outside the token dictionary") from exc
    raise coder.DecodeError(f"unknown token mode {mode!r} in header")


# -- subcommands ----------------------------------------------------------------

def cmd_compress(args) -> int:
    data = Path(args.input).read_bytes()
    letters, tok_head = tokenize(data, args.tokens)
    needed = 256 if args.tokens == "bytes" else max(letters, default=-1) + 1
    size = args.alphabet_size or max(needed, 2)
    if size < needed:
        raise CliError(f"--alphabet-size {size} is smaller than the {needed} letters in use")
    tree = _load_json(args.tree, "tree") if args.tree else None
    code = code_from_dict(_code_doc(args.code)) if args.code else None
    pred = make_predictor(args.predictor, size, tree, code)
    if isinstance(pred, PredictorTree) and pred.size < needed:
        raise CliError(f"tree has {pred.size} leaves but the input uses {needed} letters")
    stream = coder.encode(letters, pred, extra={"tokens": tok_head})
    Path(args.out).write_bytes(stream.to_bytes())
    config = {"command": "compress", "input": args.input, "out": args.out,
              "predictor": pred.descriptor(), "tokens": args.tokens}
    n = stream.n_symbols
    print(f"config: {json.dumps(config, sort_keys=True)}")
    print(f"symbols: {n}")
    print(f"payload bits: {stream.payload_bits}")
    print(f"bits/symbol: {stream.payload_bits / n if n else 0.0:.6f}")
    print(f"ideal bits: {stream.ideal_bits:.6f}")
    return 0


def cmd_decompress(args) -> int:
    stream = coder.CodecStream.from_bytes(Path(args.input).read_bytes())
    letters = coder.decode(stream)
    head = stream.extra.get("tokens", {"mode": "ids"})
    Path(args.out).write_bytes(detokenize(letters, head))
    print(f"symbols: {len(letters)}")
    return 0


def _resolve_simulation(args) -> dict:
    config = _load_json(args.config, "config") if args.config else {}
    if not isinstance(config, dict):
        raise CliError("config: expected a JSON object")
    for key in ("mode", "predictor", "alphabet_size", "trials", "seed", "tail_eps"):
        val = getattr(args, key)
        if val is not None:
            config[key] = val
    if args.source:
        config["source"] = _source_doc(args.source)
    if args.tree:
        config["tree"] = _load_json(args.tree, "tree")
    if args.code:
        config["code"] = _code_doc(args.code)
    if args.t:
        config["t"] = [int(x) for x in args.t.split(",")]
    config.setdefault("mode", "average")
    config.setdefault("predictor", "laplace")
    config.setdefault("trials", 10000)
    config.setdefault("seed", 0)
    config.setdefault("tail_eps", 1e-9)
    config.setdefault("t", [10, 100, 1000])
    config.setdefault("alphabet_size", None)
    config.setdefault("tree", None)
    config.setdefault("code", None)
    if "source" not in config:
        raise CliError("config.source: required")
    if config["mode"] not in ("average", "escape", "decay", "cumulative"):
        raise CliError(f"config.mode: unknown mode {config['mode']!r}")
    if not isinstance(config["t"], list) or not config["t"] or \
            any(not isinstance(t, int) or t < 0 for t in config["t"]):
        raise CliError("config.t: expected a non-empty list of non-negative integers")
    if not isinstance(config["trials"], int) or config["trials"] < 1:
        raise CliError("config.trials: expected a positive integer")
    return config


def _run_simulation(config: dict) -> RedundancyReport:
    try:
        src = SourceSpec.from_dict(config["source"])
    except (SourceError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"config.source: {exc}") from exc
    code = code_from_dict(config["code"]) if config["code"] else None
    size = config["alphabet_size"] or src.size
    trials, seed, eps, grid = config["trials"], config["seed"], config["tail_eps"], config["t"]
    mode = config["mode"]
    if mode == "escape":
        est = from_name("krichevsky" if config["predictor"] == "escape-kt" else "laplace")
        return theorem2_check(src, size, grid, trials, seed, est)
    if mode == "decay":
        if code is None:
            raise CliError("config.code: required for decay mode")
        name = config["predictor"]
        return theorem3_decay(src, code, from_name("laplace" if name.startswith("escape") else name),
                              grid, trials, seed, eps)
    pred = make_predictor(config["predictor"], size, config["tree"], code)
    bound = _bound_fn(pred, src, eps)
    if mode == "cumulative":
        table = cumulative_redundancy(pred, src, max(grid), trials, seed, eps)
        report = RedundancyReport(pred.descriptor(), src.descriptor(), trials, seed)
        for t in grid:
            if t == 0:
                continue
            i = t - 1
            report.rows.append(ReportRow(t, float(table.r[i]), float(table.r_stderr[i]),
                                         None if bound is None else bound(t), 0.0,
                                         float(table.R[i])))
        return report
    path_length = pred.path_length if isinstance(pred, LazyCodeTreePredictor) else None
    return redundancy_table(pred, src, grid, trials, seed, bound=bound, exact=False,
                            tail_eps=eps, path_length=path_length)


def _bound_fn(pred, src: SourceSpec, eps: float):
    if isinstance(pred, PredictorTree) and pred.estimator == LAPLACE:
        if src.size is not None and src.size > pred.size:
            raise CliError("source has more letters than the tree")
        return lambda t: theorem1_bound(pred, src, t)
    if isinstance(pred, EscapePredictor) and src.is_finite:
        limit = min(src.support_size, pred.size - 1)
        scale = 1 if pred.estimator == LAPLACE else 2
        return lambda t: limit / (scale * t) if t else None
    if isinstance(pred, LazyCodeTreePredictor) and pred.estimator == LAPLACE:
        return lambda t: code_tree_bound(pred.code, src, t, eps).total
    return None


def cmd_simulate(args) -> int:
    config = _resolve_simulation(args)
    report = _run_simulation(config)
    csv_text = report.to_csv()
    echo = "config: " + json.dumps(config, sort_keys=True)
    if args.out:
        Path(args.out).write_text(csv_text)
        print(echo)
        print(report.format_table())
    else:
        sys.stdout.write(csv_text)
        print(echo, file=sys.stderr)
    return 0


def cmd_bound(args) -> int:
    src = SourceSpec.from_dict(_source_doc(args.source))
    if args.code:
        code = code_from_dict(_code_doc(args.code))
        res = code_tree_bound(code, src, args.t, args.tail_eps)
        terms, total = res.terms, res.total
        extra = f"tail remainder: {res.remainder:.6g}"
    else:
        if args.tree:
            try:
                tree = from_nested(_load_json(args.tree, "tree"), LAPLACE)
            except TreeError as exc:
                raise CliError(f"malformed tree spec: {exc}") from exc
        elif args.alphabet_size:
            tree = build_flat(args.alphabet_size)
        else:
            raise CliError("bound needs --tree, --code or --alphabet-size")
        terms = theorem1_terms(tree, src, args.t, args.scale_by_sons)
        total = theorem1_bound(tree, src, args.t, args.scale_by_sons)
        extra = ""
    print(f"bound: {total:.6f} bits")
    print(f"{'vertex':<12} {'sons':>5} {'p(A)':>12} {'term':>12}")
    for term in terms:
        print(f"{term.label:<12} {term.sigma:>5} {term.mass:>12.6g} {term.term:>12.6g}")
    if extra:
        print(extra)
    return 0


def cmd_kraft(args) -> int:
    code = code_from_dict(_code_doc(args.code))
    res = kraft_check(code, args.max_letters)
    print(f"letters checked: {res.n_letters}")
    print(f"kraft sum: {res.sum!r}")
    if res.violation:
        (i, a), (j, b) = res.violation
        print(f"prefix violation: {a!r} (letter {i}) is a prefix of {b!r} (letter {j})")
    print(f"ok: {str(res.ok).lower()}")
    if args.source:
        src = SourceSpec.from_dict(_source_doc(args.source))
        rep = expected_codeword_length(code, src, args.tail_eps)
        if rep.divergent:
            print(f"expected length: divergent ({rep.reason})")
        else:
            print(f"expected length: {rep.mean!r} (remainder <= {rep.remainder:.3g})")
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tpc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def predictor_flags(sp, default: Optional[str] = "laplace"):
        sp.add_argument("--predictor", default=default,
                        help="laplace | krichevsky | additive:<delta> | escape | escape-kt")
        sp.add_argument("--alphabet-size", type=int, default=None)
        sp.add_argument("--tree", help="tree JSON (file or inline)")
        sp.add_argument("--code", help="code JSON (file or inline), or unary | elias-gamma")

    c = sub.add_parser("compress", help="encode a token file")
    c.add_argument("input")
    c.add_argument("--out", required=True)
    c.add_argument("--tokens", choices=("words", "ids", "bytes"), default="words")
    predictor_flags(c)
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="decode a stream file")
    d.add_argument("input")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decompress)

    s = sub.add_parser("simulate", help="Monte-Carlo redundancy report (CSV)")
    s.add_argument("--config", help="JSON config (file or inline); flags override it")
    s.add_argument("--mode", choices=("average", "escape", "decay", "cumulative"))
    predictor_flags(s, default=None)
    s.add_argument("--source", help="source JSON, uniform:<n> or geometric:<ratio>")
    s.add_argument("--t", help="comma-separated horizons")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--tail-eps", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bound", help="evaluate the tree redundancy bound")
    b.add_argument("--tree")
    b.add_argument("--code")
    b.add_argument("--alphabet-size", type=int)
    b.add_argument("--source", required=True)
    b.add_argument("--t", type=int, required=True)
    b.add_argument("--tail-eps", type=float, default=1e-9)
    b.add_argument("--scale-by-sons", action="store_true",
                   help="use (sons-1)*min(p, 1/(t+1)) per vertex")
    b.set_defaults(func=cmd_bound)

    k = sub.add_parser("kraft", help="Kraft sum, prefix check and expected length")
    k.add_argument("--code", required=True)
    k.add_argument("--max-letters", type=int, default=1000)
    k.add_argument("--source")
    k.add_argument("--tail-eps", type=float, default=1e-9)
    k.set_defaults(func=cmd_kraft)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, coder.CoderError, PredictorSpecError, TreeError, CodeError,
            SourceError, EstimatorError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
