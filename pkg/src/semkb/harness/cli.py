"""Command-line entry point.

Every subcommand writes CSV (with a header row) to ``--out`` or stdout. On
failure the process exits nonzero after printing one line of the form
``error: <kind>: <message>`` to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from .. import knowledge_base as kbm
from .config import ConfigError, ExperimentConfig, load_config
from . import experiments as ex

EXIT_USAGE, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 2, 3, 4, 5


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file; flags override it")
    common.add_argument("--corpus")
    common.add_argument("--kb")
    common.add_argument("--model", action="append", help="checkpoint path (repeatable for eval)")
    common.add_argument("--vocab")
    common.add_argument("--embeddings", help="external sentence-embedding table")
    common.add_argument("--ldpc", help="alist parity-check matrix")
    common.add_argument("--huffman", help="Huffman table file")
    common.add_argument("--channel", choices=["awgn", "rician", "rayleigh"])
    common.add_argument("--rician-k-db", type=float)
    common.add_argument("--snr-grid", help="comma-separated SNRs in dB")
    common.add_argument("--theta", help="threshold (comma-separated list for theta-sweep)")
    common.add_argument("--seed", help="comma-separated seeds")
    common.add_argument("--profile", choices=["desk", "paper"])
    common.add_argument("--methods", help="comma-separated method names")
    common.add_argument("--epochs", type=int)
    common.add_argument("--eval-snr-db", type=float)
    common.add_argument("--no-knowledge", action="store_true", help="train the no-knowledge ablation")
    common.add_argument("--include-index-cost", action="store_true")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="semkb", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("build-kb", "build a knowledge base from the training split"),
        ("train", "train a transceiver; writes the checkpoint to --model and the loss trace as CSV"),
        ("eval", "evaluate trained models over the SNR grid"),
        ("baseline-eval", "evaluate the classical pipelines over the SNR grid"),
        ("entropy-report", "semantic-entropy report of a corpus against a knowledge base"),
        ("theta-sweep", "knowledge-base size and performance versus threshold"),
    ):
        sub.add_parser(name, parents=[common], help=help_)
    return p


def _config(args, command: str) -> ExperimentConfig:
    overrides = {
        "corpus": args.corpus, "kb": args.kb, "vocab": args.vocab, "embeddings": args.embeddings,
        "ldpc": args.ldpc, "huffman": args.huffman, "channel": args.channel,
        "rician_k_db": args.rician_k_db, "snr_grid": args.snr_grid, "seeds": args.seed,
        "profile": args.profile, "methods": args.methods, "epochs": args.epochs,
        "eval_snr_db": args.eval_snr_db, "out": args.out,
        "model": ",".join(args.model) if args.model else None,
    }
    if args.theta is not None:
        overrides["thetas" if command == "theta-sweep" else "theta"] = args.theta
    if args.no_knowledge:
        overrides["use_knowledge"] = False
    if args.include_index_cost:
        overrides["include_index_cost"] = True
    return load_config(args.config, overrides)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _require(value, what: str):
    if not value:
        raise ex.ExperimentError(f"missing {what}")
    return value


def run(command: str, cfg: ExperimentConfig) -> str:
    if command == "build-kb":
        data = ex.prepare_data(cfg)
        kb = ex.build_kb(cfg, data)
        kbm.save(kb, _require(cfg.kb, "--kb output path"))
        return _table(["theta", "kb_size", "index_bits", "train_sentences"],
                      [[repr(cfg.theta), len(kb), kb.index_bits(), len(data.split.train)]])
    if command == "train":
        path = _require(cfg.model, "--model output path")[0]
        data = ex.prepare_data(cfg)
        kb = ex.load_kb(cfg) if cfg.use_knowledge else None
        result = ex.train_model(cfg, data, kb, cfg.seeds[0])
        meta = {"use_knowledge": cfg.use_knowledge, "seed": cfg.seeds[0], "split_seed": cfg.split_seed,
                "channel": cfg.channel, "profile": cfg.profile}
        ex.save_model(result.model, data.vocab, path, meta)
        return result.loss_csv()
    if command == "eval":
        return ex.rows_to_csv(ex.run_evaluation(cfg), ex.ResultRow)
    if command == "baseline-eval":
        return ex.rows_to_csv(ex.run_baseline_evaluation(cfg), ex.ResultRow)
    if command == "entropy-report":
        return ex.entropy_report(cfg)
    if command == "theta-sweep":
        return ex.rows_to_csv(ex.run_threshold_sweep(cfg), ex.SweepRow)
    raise ConfigError(f"unknown command {command!r}")


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _config(args, args.command)
        text = run(args.command, cfg)
    except ConfigError as exc:
        print(f"error: config: {_one_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except (ex.ExperimentError, kbm.KnowledgeBaseError, FileNotFoundError, ValueError) as exc:
        print(f"error: data: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - the CLI contract is one line, never a traceback
        print(f"error: runtime: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return EXIT_RUNTIME
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
