"""Write the synthetic ambiguity fixture as CLI input files.

Produces src.vec, tgt.vec, corpus.txt and gold.txt in the output directory,
so the command-line tool can be tried without real data.
"""

import argparse
from pathlib import Path

from clwe_align.corpus import write_parallel_corpus
from clwe_align.embeddings import save_embeddings
from clwe_align.synthetic import ambiguity_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir")
    ap.add_argument("--pairs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    fx = ambiguity_fixture(n_pairs=args.pairs, seed=args.seed)
    save_embeddings(fx.store, "src", out / "src.vec")
    save_embeddings(fx.store, "tgt", out / "tgt.vec")
    write_parallel_corpus(fx.corpus, out / "corpus.txt")
    with open(out / "gold.txt", "w", encoding="utf-8") as f:
        for g in fx.gold:
            f.write(" ".join(f"{i}-{j}" for i, j in sorted(g.sure)) + "\n")
    print(f"wrote {len(fx.corpus)} pairs to {out}")


if __name__ == "__main__":
    main()
