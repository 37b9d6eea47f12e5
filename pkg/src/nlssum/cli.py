"""Command-line entry point: ``nlssum <subcommand> ...``.

Exit codes: 0 success, 1 bad input or usage, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
import warnings
from pathlib import Path

from . import __version__
from .errors import InputError

log = logging.getLogger("nlssum")

USER_ERROR, INTERNAL_ERROR = 1, 2


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"missing required flag --{name.replace('_', '-')}")


def _lang_paths(items, flag):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"{flag} expects LANG=PATH, got {item!r}")
        lang, path = item.split("=", 1)
        out[lang] = path
    return out


def _existing(path, flag):
    if not Path(path).is_file():
        raise InputError(f"{flag}: file not found: {path}")
    return path


def _write_lines(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _read_selections(path):
    out = {}
    with open(_existing(path, "--selections"), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[rec["id"]] = [int(i) for i in rec["selected"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad selection record ({exc})") from None
    return out


def _provider(args, lang):
    from .augment import make_provider
    from .corpus import load_translation_memory

    memory = None
    if args.provider == "memory":
        _need(args, "tm")
        memory = load_translation_memory(_existing(args.tm, "--tm"), "en", lang)
    return make_provider(args.provider, memory=memory, prefix=args.prefix, target_lang=lang)


# --- subcommands --------------------------------------------------------------


def cmd_oracle_labels(args):
    from .corpus import load_corpus
    from .oracle import OracleConfig, label_corpus

    _need(args, "corpus", "out")
    pairs = load_corpus(args.corpus)
    labels = label_corpus(pairs, OracleConfig(args.metric), args.jobs)
    _write_lines(args.out, ({"id": p.id, "positive": list(l.positive_indices)}
                            for p, l in zip(pairs, labels)))
    log.info("labelled %d documents -> %s", len(pairs), args.out)


def cmd_augment(args):
    from .augment import WrConfig, derive_seed, mt_translate, word_replace
    from .corpus import Document, SummaryPair, load_corpus, load_dictionary, save_corpus

    _need(args, "corpus", "out")
    if bool(args.dict) == bool(args.provider):
        raise UsageError("pass exactly one of --dict (word replacement) or --provider (translation)")
    pairs = load_corpus(args.corpus)
    out = []
    if args.dict:
        d = load_dictionary(_existing(args.dict, "--dict"), "en", args.lang)
        for p in pairs:
            cfg = WrConfig(args.rate, derive_seed(args.seed, 0, p.id), d)
            out.append(SummaryPair(Document(p.id, p.language, word_replace(p.document.sentences, cfg)),
                                   p.summary))
    else:
        prov = _provider(args, args.lang)
        for p in pairs:
            sents = mt_translate(p.document.sentences, prov, args.strict)
            out.append(SummaryPair(Document(p.id, args.lang, sents),
                                   mt_translate(p.summary, prov, args.strict)))
    save_corpus(out, args.out)


def cmd_labelsets(args):
    from .corpus import BilingualDictionary, load_corpus, load_dictionary
    from .labelsets import build_corpus_label_sets, save_label_sets
    from .oracle import OracleConfig

    _need(args, "corpus", "out", "lang")
    pairs = load_corpus(args.corpus)
    prov = _provider(args, args.lang)
    if args.dict:
        fwd = load_dictionary(_existing(args.dict, "--dict"), "en", args.lang)
    else:
        fwd = BilingualDictionary("en", args.lang, {})
    if args.rev_dict:
        back = load_dictionary(_existing(args.rev_dict, "--rev-dict"), args.lang, "en")
    else:
        back = fwd.inverted()
    records = build_corpus_label_sets(pairs, prov, fwd, back, lang=args.lang, strict=args.strict,
                                      seed=args.seed, oracle_config=OracleConfig(args.metric),
                                      jobs=args.jobs)
    save_label_sets(records, args.out)
    changed = sum(r.U_a != r.U_b for r in records)
    log.info("%d records, U_b differs from U_a on %d", len(records), changed)
    if args.dump_weights:
        _need(args, "checkpoint")
        _dump_weights(args, pairs, records)


def _dump_weights(args, pairs, records):
    from .encoder import load_checkpoint, predict_alpha, predict_beta, set_means
    from .labelsearch import search_weights

    model, _ = load_checkpoint(args.checkpoint)
    by_id = {p.id: p for p in pairs}
    rows = []
    for rec in records:
        enc = model.encode(by_id[rec.id].document.tokenized())
        labels = rec.truncated(enc.n_sentences)
        u1 = enc.sentence_vectors.detach()
        alpha_hat = predict_alpha(model, u1)
        beta = predict_beta(model, set_means(u1, labels.sets))
        w = search_weights(alpha_hat, beta, labels)
        rows.append({"id": rec.id, "lang": rec.lang, "alpha": w.alpha.tolist(),
                     "beta": w.beta.tolist(), "l_raw": w.l_raw.tolist(), "l": w.l.tolist()})
    _write_lines(args.dump_weights, rows)


def cmd_train(args):
    from .corpus import load_corpus, load_dictionary, sentence_counts
    from .encoder import EncoderConfig, save_checkpoint
    from .labelsets import load_label_sets
    from .training import TrainConfig, train, write_loss_log

    _need(args, "corpus", "labels", "out")
    langs = tuple(l for l in args.langs.split(",") if l)
    dict_paths = _lang_paths(args.dict, "--dict")
    for lang, path in dict_paths.items():
        _existing(path, "--dict")
    pairs = load_corpus(args.corpus)
    labels = load_label_sets(args.labels, sentence_counts(pairs))
    dicts = {lang: load_dictionary(path, "en", lang) for lang, path in dict_paths.items()}
    enc = EncoderConfig(dim=args.dim, max_tokens=args.max_tokens,
                        local_attention=not args.full_attention, init_seed=args.seed)
    config = TrainConfig(steps=args.steps, batch=args.batch, accum=args.accum, lr=args.lr,
                         warmup=args.warmup, seed=args.seed, wr_rate=args.wr_rate, langs=langs,
                         mode=args.mode, fixed_weight=args.fixed_weight, encoder=enc)
    result = train(pairs, labels, dicts, config)
    save_checkpoint(args.out, result.model, config.to_dict(), result.rng_state)
    if args.log:
        write_loss_log(result.log, args.log)
    log.info("final loss %.4f -> %s", result.log[-1]["loss"], args.out)


def cmd_infer(args):
    from .corpus import load_corpus
    from .encoder import load_checkpoint
    from .inference import extract_summary

    _need(args, "checkpoint", "corpus", "out")
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    model, _ = load_checkpoint(args.checkpoint)
    pairs = load_corpus(args.corpus)
    _write_lines(args.out, ({"id": p.id, "selected": list(
        extract_summary(model, p.document, args.k, not args.no_blocking).selected_indices)}
        for p in pairs))


def cmd_evaluate(args):
    from .corpus import load_corpus
    from .evaluation import evaluate, lead_k, oracle_selections, selection_f1

    _need(args, "corpus", "out")
    pairs = load_corpus(args.corpus)
    if args.baseline == "lead":
        selections, system = {p.id: lead_k(p.document, args.k) for p in pairs}, f"lead-{args.k}"
    elif args.baseline == "oracle":
        selections, system = oracle_selections(pairs), "oracle"
    else:
        _need(args, "selections")
        selections, system = _read_selections(args.selections), args.system
    report = evaluate(selections, pairs, system, args.seed, args.resamples)
    data = report.to_dict()
    data["selection_f1"] = selection_f1(selections, oracle_selections(pairs))
    Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.figure:
        from .plotting import plot_report

        plot_report(report, args.figure)
    for lang, s in sorted(report.languages.items()):
        log.info("%s %s ROUGE-L %.4f [%.4f, %.4f] n=%d", system, lang, s.mean, s.lo, s.hi, s.n)


def _label_source(path, set_names, sizes):
    """Yield per-set lists of (indices, n) from oracle-label or label-set JSON-lines."""
    per_set = {name: [] for name in set_names}
    with open(_existing(path, "--labels"), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                n = sizes[rec["id"]]
                for name in set_names:
                    if name == "positive":
                        idx = rec["positive"]
                    elif name == "union":
                        idx = sorted(set().union(*(rec[k] for k in ("U_a", "U_b", "U_c", "U_d"))))
                    else:
                        idx = rec[name]
                    if any(not 0 <= i < n for i in idx):
                        raise InputError(f"index out of range for {n} sentences")
                    per_set[name].append((idx, n))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: bad label record ({exc})") from None
            except InputError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return per_set


def cmd_analyze_positions(args):
    from .corpus import load_corpus, sentence_counts
    from .evaluation import position_density

    _need(args, "labels", "corpus", "out")
    names = [s for s in args.set.split(",") if s]
    sizes = sentence_counts(load_corpus(args.corpus))
    per_set = _label_source(args.labels, names, sizes)
    curves = {name: position_density(per_set[name], args.bandwidth, args.grid_size)
              for name in names}
    out = Path(args.out)
    for name, curve in curves.items():
        path = out if len(names) == 1 else out.with_name(f"{out.stem}.{name}{out.suffix}")
        path.write_text(curve.to_csv(), encoding="utf-8")
        log.info("%s: %d positions, bandwidth %.4f, mass above 0.5 = %.3f", name,
                 curve.positions.size, curve.bandwidth, curve.mass_above(0.5))
    if args.figure:
        from .plotting import plot_densities

        plot_densities(curves, args.figure, "oracle sentence positions")


def cmd_make_synthetic(args):
    from .synthetic import make_synthetic

    _need(args, "out")
    langs = tuple(l for l in args.langs.split(",") if l)
    bundle = make_synthetic(args.train, args.test, args.seed, args.bias, langs)
    bundle.save(args.out)
    log.info("wrote synthetic corpus to %s", args.out)


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON file of flag values (flags win)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="nlssum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nlssum {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=func)
        return p

    def provider_flags(p):
        p.add_argument("--provider", choices=("memory", "prefix", "identity"))
        p.add_argument("--tm", help="translation memory TSV (provider 'memory')")
        p.add_argument("--prefix", default="xx_", help="token prefix (provider 'prefix')")
        p.add_argument("--lang", default="xx", help="target language code")
        p.add_argument("--strict", action="store_true", help="fail on untranslatable sentences")

    p = add("oracle-labels", cmd_oracle_labels, "greedy oracle labels for a corpus")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--metric", choices=("rouge12", "rougeL"), default="rouge12")

    p = add("augment", cmd_augment, "word replacement or translation of a corpus")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--dict", help="EN->target dictionary for word replacement")
    provider_flags(p)

    p = add("labelsets", cmd_labelsets, "build the four multilingual label sets")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--dict", help="EN->target dictionary")
    p.add_argument("--rev-dict", help="target->EN dictionary (default: inverted --dict)")
    p.add_argument("--metric", choices=("rouge12", "rougeL"), default="rouge12")
    p.add_argument("--dump-weights", help="write alpha/beta/l JSON-lines (needs --checkpoint)")
    p.add_argument("--checkpoint")
    provider_flags(p)
    p.set_defaults(provider="identity")

    p = add("train", cmd_train, "train the extractive model")
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--mode", default="nlssum",
                   choices=("nlssum", "nlssum-sep", "fixed-weight", "english-only"))
    p.add_argument("--langs", default="fr", help="comma-separated target languages")
    p.add_argument("--dict", action="append", metavar="LANG=PATH",
                   help="EN->LANG word-replacement dictionary (repeatable)")
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--accum", type=int, default=2)
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--warmup", type=int, default=30)
    p.add_argument("--wr-rate", type=float, default=0.5)
    p.add_argument("--fixed-weight", type=float, default=0.8)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--max-tokens", type=int, default=512)
    p.add_argument("--full-attention", action="store_true",
                   help="let every token attend across sentence boundaries")
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--log", help="loss log CSV path")

    p = add("infer", cmd_infer, "top-k extraction with trigram blocking")
    p.add_argument("--checkpoint")
    p.add_argument("--corpus")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--no-blocking", action="store_true")
    p.add_argument("--out")

    p = add("evaluate", cmd_evaluate, "ROUGE-L with bootstrap confidence intervals")
    p.add_argument("--selections")
    p.add_argument("--corpus")
    p.add_argument("--baseline", choices=("lead", "oracle"))
    p.add_argument("--k", type=int, default=3, help="k for the lead baseline")
    p.add_argument("--system", default="system")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--out")
    p.add_argument("--figure", help="also render a PNG bar chart")

    p = add("analyze-positions", cmd_analyze_positions, "density of oracle sentence positions")
    p.add_argument("--labels")
    p.add_argument("--corpus")
    p.add_argument("--set", default="positive",
                   help="comma list of: positive, U_a, U_b, U_c, U_d, union")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--grid-size", type=int, default=101)
    p.add_argument("--out")
    p.add_argument("--figure", help="also render a PNG of the curves")

    p = add("make-synthetic", cmd_make_synthetic, "write the synthetic bilingual corpus")
    p.add_argument("--out")
    p.add_argument("--train", type=int, default=200)
    p.add_argument("--test", type=int, default=50)
    p.add_argument("--bias", type=float, default=0.5)
    p.add_argument("--langs", default="fr")
    return parser


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    path = Path(args.config)
    if not path.is_file():
        raise InputError(f"--config: file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"--config: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict) or any(isinstance(v, (dict, list)) for v in cfg.values()):
        raise InputError("--config must be a flat JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    unknown = sorted(k for k in cfg if not hasattr(args, k))
    if unknown:
        raise InputError(f"--config: unknown keys {unknown}")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    subparser.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return USER_ERROR
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
        return 0
    except (InputError, OSError) as exc:
        print(f"nlssum: error: {exc}", file=sys.stderr)
        return USER_ERROR
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else 0
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
