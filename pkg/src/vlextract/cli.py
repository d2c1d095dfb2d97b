"""Command-line entry point: ``extract``, ``verify``, ``analyze`` and ``rankcodec``.

Payload goes to the output channel, diagnostics to stderr. Failures exit with
2 (configuration), 3 (input ran out) or 4 (budget or threshold refusal), each
with a single ``error <kind>: <reason>`` line.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from contextlib import ExitStack
from dataclasses import dataclass

from .bits import BitReader, BitWriter, EndOfStream, bits_to_hex, hex_to_bits
from .codec import rank, unrank
from .frontends import KINDS, BudgetExceeded, ThresholdPlan, ThresholdUnreachable, make_plan
from .hasher import draw_seed
from .models import (BiasedCoin, DegenerateModel, DivergenceUndefined, IntervalCoin, SourceModel,
                     coin_divergence, load_model)
from .oracle import (Distribution, efficiency_trend, entropy, fixed_length_baseline, input_law,
                     trend_csv, verify_pipeline)
from .pipeline import BlockPlan, SeededVLX, build_vlx, extract_seeded, extract_seedless

EXIT_FAIL, EXIT_CONFIG, EXIT_STREAM, EXIT_BUDGET = 1, 2, 3, 4


class ConfigError(ValueError):
    pass


def _fail(kind: str, code: int, msg) -> int:
    reason = " ".join(str(msg).split())
    if reason.startswith(kind + ": "):
        reason = reason[len(kind) + 2:]
    print(f"error {kind}: {reason}", file=sys.stderr)
    return code


# -- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    """Everything resolved from flags and the model file, before any input is read."""

    construction: str
    plan: ThresholdPlan
    model: SourceModel | None  # model the stopping rule plans against
    source: SourceModel | None  # source the oracle measures
    vlx: SeededVLX


def _planning_model(src: SourceModel | None) -> SourceModel | None:
    if src is None:
        return None
    if isinstance(src, IntervalCoin):
        return BiasedCoin(src.reference)
    if hasattr(src, "level_length"):
        # grouping sources live on fixed-length strings: read plain blocks of that length
        return BiasedCoin(0.5)
    return src


def _default_beta(src: SourceModel | None) -> float:
    if isinstance(src, IntervalCoin):
        return coin_divergence(src.lo, src.hi, src.reference)
    if hasattr(src, "level_length"):
        return src.beta
    return 0.0


def _load(path: str | None) -> SourceModel | None:
    if path is None:
        return None
    try:
        return load_model(path)
    except OSError as exc:
        raise ConfigError(f"model file: {exc}") from exc


def resolve(args, m: int | None = None) -> RunConfig:
    if args.construction not in KINDS:
        raise ConfigError(f"construction must be one of {', '.join(KINDS)}")
    src = _load(args.model)
    if args.source is not None:
        measured = _load(args.source)
    else:
        measured = src
    if args.construction == "known" and src is None:
        raise ConfigError("the known construction needs --model")
    beta = args.beta if args.beta is not None else _default_beta(src)
    model = _planning_model(src)
    threshold = None
    if hasattr(src, "level_length"):
        threshold = float(src.level_length)
    try:
        plan = make_plan(args.m if m is None else m, args.eps, beta, args.eps_p, eps_lz=args.eps_lz,
                         threshold=threshold, lz_phrases=args.phrases)
        vlx = build_vlx(args.construction, plan, model if args.construction != "coin" else None,
                        length_cap=args.length_cap)
        n = vlx.frontend.n
    except ThresholdUnreachable:
        raise
    except (ValueError, DegenerateModel) as exc:
        raise ConfigError(str(exc)) from exc
    if n > args.max_n:
        raise BudgetExceeded(f"budget: block length n={n} exceeds cap {args.max_n}")
    if not vlx.spec.lhl_ok():
        logging.getLogger(__name__).warning("m exceeds k - 2 log2(1/eps); hash output is not covered")
    return RunConfig(args.construction, plan, model, measured, vlx)


def _seed(cfg: RunConfig, text: str | None):
    if text is None:
        return None
    if text == "os":
        seed = draw_seed(cfg.vlx.spec)
        print(f"seed {bits_to_hex(seed)}", file=sys.stderr)
        return seed
    try:
        return hex_to_bits(text, cfg.vlx.spec.seed_length)
    except ValueError as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith("seed length") else f"seed length: {msg}") from exc


def _summary(cfg: RunConfig) -> str:
    p, spec = cfg.plan, cfg.vlx.spec
    return (f"m {p.m} k {p.k} T {p.T:g} n {spec.n} seed_length {spec.seed_length} "
            f"beta_p {p.beta_p:g}")


# -- subcommands -----------------------------------------------------------------------


def cmd_extract(args) -> int:
    cfg = resolve(args)
    seedless = args.block_len is not None
    seed = None if seedless else _seed(cfg, args.seed if args.seed is not None else "os")
    vlx = cfg.vlx if seed is None else cfg.vlx.with_seed(seed)
    if args.count < 1:
        raise ConfigError("count must be positive")
    block_plan = BlockPlan(args.block_len, args.gamma) if seedless else None
    print(_summary(cfg), file=sys.stderr)

    with ExitStack() as stack:
        fin = sys.stdin.buffer if args.input == "-" else stack.enter_context(open(args.input, "rb"))
        reader = BitReader(fin)
        outputs, consumed = [], 0
        status = 0
        try:
            for _ in range(args.count):
                if seedless:
                    res = extract_seedless(block_plan, vlx, reader)
                else:
                    res = extract_seeded(vlx, reader)
                outputs.append(res.output)
                consumed += res.consumed
        except EndOfStream as exc:
            status = _fail("stream", EXIT_STREAM, f"input exhausted after {len(outputs)} outputs: {exc}")
        fout = sys.stdout.buffer if args.output == "-" else stack.enter_context(open(args.output, "wb"))
        writer = BitWriter(fout)
        for y in outputs:
            writer.write_bits(y)
        writer.flush()
    print(f"consumed {consumed} bits_written {sum(len(y) for y in outputs)} outputs {len(outputs)}",
          file=sys.stderr)
    return status


def cmd_verify(args) -> int:
    cfg = resolve(args)
    if cfg.source is None:
        raise ConfigError("verify needs --model or --source to measure against")
    seed = _seed(cfg, args.seed)
    vlx = cfg.vlx if seed is None else cfg.vlx.with_seed(seed)
    report = verify_pipeline(vlx, cfg.source, support_limit=args.max_support,
                             sampled_seeds=args.sampled_seeds, max_seed_bits=args.max_seed_bits)
    out = [report.to_text().rstrip("\n")]
    base = getattr(cfg.source, "base", None)
    if base is not None:
        law = input_law(vlx.frontend, base, args.max_support)
        H_M = entropy(Distribution.from_pairs(law))
        out.append(f"entropy_X_model {H_M:.6g}")
        out.append(f"efficiency_model {report.m / H_M:.6g}")
        out.append(f"efficiency_model_over_source {report.entropy_X / H_M:.6g}")
        out.append(f"grouping_bound {(1 - cfg.source.beta) * 1.1:.6g}")
    print("\n".join(out))
    ok = report.distance_to_uniform <= report.eps + 1e-12 and report.minentropy_Z >= report.k - 1e-9
    return 0 if ok else EXIT_FAIL


def cmd_analyze(args) -> int:
    try:
        ms = [int(v) for v in args.m_list.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"m list: {exc}") from exc
    if not ms:
        raise ConfigError("m list is empty")
    cfgs = {m: resolve(args, m) for m in ms}
    source = next(iter(cfgs.values())).source
    if source is None:
        raise ConfigError("analyze needs --model or --source")
    rows = efficiency_trend(lambda m: cfgs[m].vlx, ms, source, args.max_support)
    extra = {}
    if isinstance(source, IntervalCoin):
        lo, hi = fixed_length_baseline(source.lo, source.hi)
        extra = {"beta": cfgs[ms[0]].plan.beta, "baseline_lo": lo, "baseline_hi": hi}
    sys.stdout.write(trend_csv(rows, extra))
    return 0


def cmd_rankcodec(args) -> int:
    if args.op == "rank":
        if len(args.values) != 1:
            raise ConfigError("rank takes one bit string")
        try:
            print(rank(args.values[0]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return 0
    if len(args.values) != 3:
        raise ConfigError("unrank takes LENGTH ONES RANK")
    try:
        length, ones, r = (int(v) for v in args.values)
        print(unrank(length, ones, r))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return 0


# -- parser ---------------------------------------------------------------------------


def _plan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--construction", default="known", help="known, coin or lz")
    p.add_argument("--model", help="model config file (stopping rule plans against it)")
    p.add_argument("--source", help="config of the source to measure, if it differs from --model")
    p.add_argument("--m", type=int, default=2, help="output bits per extraction")
    p.add_argument("--eps", type=float, default=0.25, help="target distance to uniform")
    p.add_argument("--beta", type=float, help="model uncertainty (interval models default to their minimax)")
    p.add_argument("--eps-p", dest="eps_p", type=float, help="finite-length slack added to beta")
    p.add_argument("--eps-lz", dest="eps_lz", type=float, default=0.1, help="LZ length gap")
    p.add_argument("--phrases", type=int, help="force the LZ phrase count")
    p.add_argument("--seed", help="hex seed (MSB first) or 'os'")
    p.add_argument("--length-cap", dest="length_cap", type=int, default=1 << 14,
                   help="longest stopping sequence searched for the known rule")
    p.add_argument("--max-n", dest="max_n", type=int, default=4096, help="largest block length accepted")
    p.add_argument("--max-support", dest="max_support", type=int, default=1 << 20,
                   help="largest stopping set the oracle enumerates")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vlextract", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="extract bits from an input stream")
    _plan_flags(ex)
    ex.add_argument("--in", dest="input", default="-")
    ex.add_argument("--out", dest="output", default="-")
    ex.add_argument("--count", type=int, default=1, help="number of m-bit outputs")
    ex.add_argument("--block-len", dest="block_len", type=int,
                    help="seedless mode: derive the seed from blocks of this length minus one")
    ex.add_argument("--gamma", type=int, default=2, help="seedless mode: number of seed blocks")
    ex.set_defaults(func=cmd_extract)

    ve = sub.add_parser("verify", help="exact oracle report for one configuration")
    _plan_flags(ve)
    ve.add_argument("--sampled-seeds", dest="sampled_seeds", type=int, default=10_000)
    ve.add_argument("--max-seed-bits", dest="max_seed_bits", type=int, default=64)
    ve.set_defaults(func=cmd_verify)

    an = sub.add_parser("analyze", help="efficiency trend over output lengths")
    _plan_flags(an)
    an.add_argument("--m-list", dest="m_list", default="2,4,6,8")
    an.set_defaults(func=cmd_analyze)

    rc = sub.add_parser("rankcodec", help="lexicographic rank of a bit string")
    rc.add_argument("op", choices=("rank", "unrank"))
    rc.add_argument("values", nargs="+")
    rc.set_defaults(func=cmd_rankcodec)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except (BudgetExceeded, ThresholdUnreachable) as exc:
        return _fail("budget", EXIT_BUDGET, exc)
    except EndOfStream as exc:
        return _fail("stream", EXIT_STREAM, exc)
    except (DivergenceUndefined, ValueError) as exc:
        return _fail("config", EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())
