"""Write synthetic NSL-KDD-format files.

    python scripts/make_synthetic.py --out data/synthetic --kind blobs --per-class 300
    python scripts/make_synthetic.py --out data/synthetic --kind imbalanced --n 20000
"""

import argparse
from pathlib import Path

from ceids import synthetic
from ceids.data import class_counts, write_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--kind", choices=("blobs", "imbalanced"), default="blobs")
    p.add_argument("--per-class", type=int, default=300, help="blobs: records per class per blob")
    p.add_argument("--n", type=int, default=20_000, help="imbalanced: training records")
    p.add_argument("--n-test", type=int, default=5_000, help="imbalanced: test records")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "blobs":
        train = synthetic.shuffled(*synthetic.make_blobs(args.per_class, seed=args.seed), seed=args.seed + 1)
        test = synthetic.make_blobs(max(1, args.per_class // 10), seed=args.seed + 2)
    else:
        train = synthetic.make_imbalanced(args.n, seed=args.seed)
        test = synthetic.make_imbalanced(args.n_test, seed=args.seed + 1)
    for name, (records, labels) in (("train.txt", train), ("test.txt", test)):
        write_dataset(out / name, records)
        counts = class_counts(labels)
        print(f"{out / name}: {len(records)} records ", {c.display: n for c, n in counts.items()})


if __name__ == "__main__":
    main()
