"""Batch command-line interface.

Subcommands: segment, train, eval, and dict (merge/stats).  Exit codes are
part of the contract: 0 success, 1 usage or configuration problems, 2
input/output problems (unreadable files, bad encodings, malformed corpora),
3 model-file problems, 4 gold/prediction misalignment.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from . import crf
from .corpus import NormalizationConfig, read_segmented_file, render_words
from .errors import (
    AlignmentError,
    ConfigError,
    CorpusFormatError,
    DegenerateLatticeError,
    IncompatibleModelError,
    ModelFormatError,
    TrainingDivergenceError,
    UnknownModelError,
)
from .features import TemplateConfig
from .lexicon import Lexicon, load_wordlist, merge
from .metrics import score_files, score_pos_files
from .modelio import load, resolve_model, save
from .trainer import TrainConfig, train


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    I/O problems, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def merge_adjacent(words: List[str], lex: Lexicon) -> List[str]:
    """Merge adjacent output words whose concatenation is a dictionary word.

    Single left-to-right pass; at each position the longest mergeable run
    wins and scanning resumes after it.  Merged output is never re-merged.
    """
    out = []
    i = 0
    n = len(words)
    cap = lex.max_len
    while i < n:
        best_end = 0
        best_word = None
        acc = words[i]
        j = i + 1
        while j < n and len(acc) + len(words[j]) <= cap:
            acc += words[j]
            j += 1
            if acc in lex:
                best_end, best_word = j, acc
        if best_word is not None:
            out.append(best_word)
            i = best_end
        else:
            out.append(words[i])
            i += 1
    return out


def process_line(model, feat_lex, line: str, merge_lex: Optional[Lexicon] = None) -> str:
    """Segment one input line.

    Whitespace runs split the line into chunks segmented independently;
    the output joins all words with single spaces.  Lines without internal
    whitespace therefore conserve their characters exactly.
    """
    chunks = line.split()
    if not chunks:
        return ""
    words: List[str] = []
    labels: Optional[List[str]] = [] if model.scheme.joint else None
    for chunk in chunks:
        ws, ls = crf.segment_words(model, feat_lex, chunk)
        words.extend(ws)
        if labels is not None:
            labels.extend(ls)
    if merge_lex is not None:
        words = merge_adjacent(words, merge_lex)
    return render_words(words, labels)


def _load_dicts(paths) -> Optional[Lexicon]:
    if not paths:
        return None
    merged, _stats = merge([load_wordlist(p) for p in paths], names=list(paths))
    return merged


def _open_in(path):
    if path == "-":
        return sys.stdin
    return open(path, encoding="utf-8")


def _open_out(path):
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _cmd_segment(args) -> int:
    model = load(resolve_model(args.model, args.model_dir))
    if args.force_dict_match and model.scheme.joint:
        raise ConfigError("--force-dict-match is not supported with joint POS models")
    if args.normalize:
        tcfg = dataclasses.replace(
            model.template_cfg, normalization=NormalizationConfig.all_on()
        )
        model = crf.CrfModel(
            model.weights, model.transitions, model.scheme, model.index, tcfg
        )
    lex = _load_dicts(args.dict)
    merge_lex = lex if args.force_dict_match else None
    if args.force_dict_match and merge_lex is None:
        raise ConfigError("--force-dict-match needs at least one --dict file")

    fin = _open_in(args.input)
    fout = _open_out(args.output)
    flush = fout is sys.stdout
    try:
        lines = (raw.rstrip("\r\n") for raw in fin)
        if args.threads > 1:
            pool = ThreadPoolExecutor(max_workers=args.threads)
            results = pool.map(
                lambda ln: process_line(model, lex, ln, merge_lex), lines
            )
        else:
            pool = None
            results = (process_line(model, lex, ln, merge_lex) for ln in lines)
        for out_line in results:
            fout.write(out_line + "\n")
            if flush:
                fout.flush()
        if pool is not None:
            pool.shutdown()
    finally:
        if fin is not sys.stdin:
            fin.close()
        if fout is not sys.stdout:
            fout.close()
    return 0


def _cmd_train(args) -> int:
    data, skipped = read_segmented_file(args.train, pos=args.pos)
    if skipped:
        print(f"segkit: skipped {skipped} blank line(s) in {args.train}", file=sys.stderr)
    dev = None
    if args.dev:
        dev, _ = read_segmented_file(args.dev, pos=args.pos)
    lex = _load_dicts(args.dict)
    init_model = load(args.init) if args.init else None

    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        eta0=args.eta0,
        rho=args.rho,
        l2=args.l2,
        seed=args.seed,
        optimizer=args.optimizer,
        min_support=args.min_support,
    )
    tcfg = TemplateConfig(
        normalization=NormalizationConfig.all_on() if args.normalize else NormalizationConfig()
    )
    model, report = train(
        data,
        cfg,
        template_cfg=tcfg,
        lexicon=lex,
        dev_data=dev,
        init_model=init_model,
        joint=args.pos,
    )

    with open(args.train, "rb") as fh:
        corpus_sha = hashlib.sha256(fh.read()).hexdigest()
    provenance = {
        "config": cfg.as_dict(),
        "epochs_run": len(report.epochs),
        "corpus_sha256": corpus_sha,
        "joint": args.pos,
        "warm_start": bool(args.init),
    }
    save(model, args.output, provenance=provenance)

    if args.report:
        report.write_jsonl(args.report)
        report.write_text(args.report + ".txt")
    last = report.epochs[-1]
    dev_part = "" if last["dev_f1"] is None else f", dev F1 {last['dev_f1']:.4f}"
    print(
        f"segkit: trained {len(report.epochs)} epoch(s), "
        f"final mean log-likelihood {last['mean_log_likelihood']:.6f}{dev_part}",
        file=sys.stderr,
    )
    return 0


def _cmd_eval(args) -> int:
    if args.pos:
        span, joint = score_pos_files(args.gold, args.pred)
        print("span " + span.format_line())
        print("joint " + joint.format_line())
    else:
        print(score_files(args.gold, args.pred).format_line())
    return 0


def _cmd_dict_merge(args) -> int:
    lexicons = [load_wordlist(p) for p in args.paths]
    merged, stats = merge(lexicons, names=list(args.paths))
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for word in sorted(merged):
            fh.write(word + "\n")
    for name, count in stats.per_source:
        print(f"{name}\t{count}")
    print(f"total\t{stats.raw_total}")
    print(f"unique\t{stats.total}")
    return 0


def _cmd_dict_stats(args) -> int:
    lexicons = [load_wordlist(p) for p in args.paths]
    _merged, stats = merge(lexicons, names=list(args.paths))
    for name, count in stats.per_source:
        print(f"{name}\t{count}")
    print(f"total\t{stats.raw_total}")
    print(f"unique\t{stats.total}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="segkit", description="Multi-domain Chinese word segmentation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_seg = sub.add_parser("segment", help="segment text line by line")
    p_seg.add_argument("--model", required=True, help="model file path or model name")
    p_seg.add_argument("--model-dir", default=None, help="directory searched for named models")
    p_seg.add_argument("--input", default="-", help="input file, or - for stdin")
    p_seg.add_argument("--output", default="-", help="output file, or - for stdout")
    p_seg.add_argument("--dict", action="append", default=[], metavar="PATH",
                       help="user dictionary (repeatable)")
    p_seg.add_argument("--force-dict-match", action="store_true",
                       help="merge adjacent output words found in the user dictionary")
    p_seg.add_argument("--normalize", action="store_true",
                       help="force full text normalization for feature extraction")
    p_seg.add_argument("--threads", type=int, default=1, help="worker threads")
    p_seg.set_defaults(func=_cmd_segment)

    p_tr = sub.add_parser("train", help="train or fine-tune a model")
    p_tr.add_argument("--train", required=True, help="training corpus (one segmented sentence per line)")
    p_tr.add_argument("--dev", default=None, help="held-out corpus scored after each epoch")
    p_tr.add_argument("--output", required=True, help="where to write the model file")
    p_tr.add_argument("--init", default=None, metavar="MODEL",
                      help="existing model to fine-tune (warm start)")
    p_tr.add_argument("--dict", action="append", default=[], metavar="PATH",
                      help="dictionary for lexicon features (repeatable)")
    p_tr.add_argument("--pos", action="store_true", help="joint word/POS training")
    p_tr.add_argument("--epochs", type=int, default=20)
    p_tr.add_argument("--batch-size", type=int, default=32)
    p_tr.add_argument("--eta0", type=float, default=0.05)
    p_tr.add_argument("--rho", type=float, default=0.02)
    p_tr.add_argument("--l2", type=float, default=1e-6)
    p_tr.add_argument("--seed", type=int, default=1)
    p_tr.add_argument("--optimizer", choices=("adf", "sgd"), default="adf")
    p_tr.add_argument("--min-support", type=int, default=None,
                      help="drop features seen fewer times than this after training")
    p_tr.add_argument("--normalize", action="store_true",
                      help="train on the normalized feature view")
    p_tr.add_argument("--report", default=None, metavar="PATH",
                      help="write per-epoch JSONL here (plus PATH.txt)")
    p_tr.set_defaults(func=_cmd_train)

    p_ev = sub.add_parser("eval", help="score a prediction file against gold")
    p_ev.add_argument("--gold", required=True)
    p_ev.add_argument("--pred", required=True)
    p_ev.add_argument("--pos", action="store_true", help="score word/POS files")
    p_ev.set_defaults(func=_cmd_eval)

    p_dict = sub.add_parser("dict", help="dictionary utilities")
    dict_sub = p_dict.add_subparsers(dest="dict_command", required=True, parser_class=_Parser)
    p_dm = dict_sub.add_parser("merge", help="merge word lists into one sorted file")
    p_dm.add_argument("--output", required=True)
    p_dm.add_argument("paths", nargs="+", metavar="PATH")
    p_dm.set_defaults(func=_cmd_dict_merge)
    p_ds = dict_sub.add_parser("stats", help="report word-list sizes and overlap")
    p_ds.add_argument("paths", nargs="+", metavar="PATH")
    p_ds.set_defaults(func=_cmd_dict_stats)

    return parser


def _reconfigure_streams():
    for stream in (sys.stdin, sys.stdout, sys.stderr):
        reconf = getattr(stream, "reconfigure", None)
        if reconf is not None:
            try:
                reconf(encoding="utf-8")
            except (ValueError, OSError):
                pass


def _fail(code: int, exc) -> int:
    print(f"segkit: error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    _reconfigure_streams()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, TrainingDivergenceError) as exc:
        return _fail(1, exc)
    except (CorpusFormatError, UnicodeDecodeError, OSError) as exc:
        return _fail(2, exc)
    except (
        ModelFormatError,
        UnknownModelError,
        IncompatibleModelError,
        DegenerateLatticeError,
    ) as exc:
        return _fail(3, exc)
    except AlignmentError as exc:
        return _fail(4, exc)
