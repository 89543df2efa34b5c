"""Desk-scale NSL-KDD run: train on a seeded subsample of KDDTrain+, score on KDDTest+.

    python scripts/run_nslkdd.py --data data/nsl-kdd [--n 20000] [--seed 0] [--out runs/desk]

Writes <out>/model.ceids, <out>/train.log and <out>/report.txt (key = value
lines: accuracy, precision, recall, f_score, tpr, fpr, binary_*, K, ...).
"""

import argparse
import logging
import os
import time
from pathlib import Path

from ceids import container, ensemble
from ceids.cli import evaluation_report, write_kv
from ceids.config import PipelineConfig, load_config
from ceids.data import load_dataset, sample_records

DEFAULT_DATA = os.environ.get("CEIDS_NSLKDD_DIR", "data/nsl-kdd")


def desk_run(data_dir, n=20_000, seed=0, config: PipelineConfig | None = None, out_dir=None):
    """Train on ``n`` sampled KDDTrain+ records, evaluate on all of KDDTest+.

    Returns ``(values, report_text, seconds)``.
    """
    data_dir = Path(data_dir)
    start = time.perf_counter()
    train = sample_records(load_dataset(data_dir / "KDDTrain+.txt"), n, seed)
    test = load_dataset(data_dir / "KDDTest+.txt")
    cfg = config or PipelineConfig()
    model = ensemble.train_pipeline([r for r, _ in train], [c for _, c in train], cfg, seed=seed)
    text, values = evaluation_report(model, [r for r, _ in test], [c for _, c in test])
    seconds = time.perf_counter() - start
    values["seconds"] = seconds
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        container.save_model(model, out_dir / "model.ceids")
        write_kv(out_dir / "report.txt", values)
    return values, text, seconds


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--data", default=DEFAULT_DATA, help="directory holding KDDTrain+.txt and KDDTest+.txt")
    p.add_argument("--n", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", default="runs/desk")
    args = p.parse_args()
    missing = [name for name in ("KDDTrain+.txt", "KDDTest+.txt") if not (Path(args.data) / name).is_file()]
    if missing:
        p.error(f"{', '.join(missing)} not found in {args.data} (pass --data or set CEIDS_NSLKDD_DIR)")

    Path(args.out).mkdir(parents=True, exist_ok=True)
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        handlers=[logging.FileHandler(Path(args.out) / "train.log", mode="w"),
                                  logging.StreamHandler()])
    values, text, seconds = desk_run(args.data, args.n, args.seed, load_config(args.config), args.out)
    print(text)
    print(f"\n{seconds / 60:.1f} min; report in {Path(args.out) / 'report.txt'}")


if __name__ == "__main__":
    main()
