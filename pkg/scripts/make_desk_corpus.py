"""Write the synthetic desk-scale corpus used by the experiments and tests."""
import argparse

from semkb.desk import write_desk_corpus

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/desk_corpus.txt")
    ap.add_argument("--n", type=int, default=2600)
    ap.add_argument("--seed", type=int, default=2024)
    a = ap.parse_args()
    write_desk_corpus(a.out, a.n, a.seed)
