"""Run the desk-scale experiment set through the CLI and write every CSV to one directory.

    python3 scripts/run_desk_experiments.py --out results/desk

Produces kb.csv, train_neural.csv, train_nokb.csv, eval.csv (neural, no-KB
ablation and classical baselines over the SNR grid), entropy.csv and
theta_sweep.csv. About 15 minutes on one CPU core with the defaults.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from semkb.harness.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]


def run(argv: list[str]) -> None:
    print("semkb", " ".join(argv), file=sys.stderr)
    code = cli(argv)
    if code:
        sys.exit(code)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--corpus", default=str(ROOT / "data" / "desk_corpus.txt"))
    p.add_argument("--out", default=str(ROOT / "results" / "desk"))
    p.add_argument("--channel", default="awgn", choices=["awgn", "rayleigh", "rician"])
    p.add_argument("--seed", default="0")
    p.add_argument("--epochs", default="20")
    p.add_argument("--sweep-seeds", default="0,1,2")
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kb, neural, nokb = str(out / "kb.txt"), str(out / "neural.ckpt"), str(out / "nokb.ckpt")
    common = ["--corpus", args.corpus, "--channel", args.channel]

    run(["build-kb", *common, "--kb", kb, "--out", str(out / "kb.csv")])
    run(["train", *common, "--kb", kb, "--model", neural, "--seed", args.seed, "--epochs", args.epochs,
         "--out", str(out / "train_neural.csv")])
    run(["train", *common, "--model", nokb, "--seed", args.seed, "--epochs", args.epochs, "--no-knowledge",
         "--out", str(out / "train_nokb.csv")])
    run(["eval", *common, "--kb", kb, "--model", neural, "--model", nokb, "--seed", args.seed,
         "--methods", "huffman+rs,fixed6+rs,huffman+ldpc,fixed6+ldpc", "--out", str(out / "eval.csv")])
    run(["entropy-report", *common, "--kb", kb, "--out", str(out / "entropy.csv")])
    run(["theta-sweep", *common, "--seed", args.sweep_seeds, "--epochs", args.epochs,
         "--out", str(out / "theta_sweep.csv")])


if __name__ == "__main__":
    main()
