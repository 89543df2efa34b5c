"""Time a default-config training run on 20,000 imbalanced synthetic records.

Stands in for the desk-scale NSL-KDD run when the official files are absent:
same record count, same class imbalance, same pipeline defaults (auto
bandwidth included). Prints per-stage wall time and the evaluation summary.

    python scripts/timing_check.py [--n 20000] [--seed 0]
"""

import argparse
import logging
import time

from ceids import ensemble, synthetic
from ceids.cli import evaluation_report
from ceids.config import PipelineConfig

BUDGET_S = 30 * 60


class StageClock(logging.Handler):
    """Prints elapsed time next to every pipeline log line."""

    def __init__(self):
        super().__init__()
        self.start = time.perf_counter()

    def emit(self, record):
        msg = record.getMessage().splitlines()[0]
        print(f"[{time.perf_counter() - self.start:8.1f}s] {msg}", flush=True)


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=20_000)
    p.add_argument("--n-test", type=int, default=5_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    log = logging.getLogger("ceids")
    log.setLevel(logging.INFO)
    log.addHandler(StageClock())

    train_records, train_labels = synthetic.make_imbalanced(args.n, seed=args.seed)
    test_records, test_labels = synthetic.make_imbalanced(args.n_test, seed=args.seed + 1)
    start = time.perf_counter()
    model = ensemble.train_pipeline(train_records, train_labels, PipelineConfig(), seed=args.seed)
    trained = time.perf_counter() - start
    text, values = evaluation_report(model, test_records, test_labels)
    total = time.perf_counter() - start
    print(text)
    print(f"training {trained:.1f}s, total {total:.1f}s, budget {BUDGET_S}s: "
          f"{'OK' if total < BUDGET_S else 'OVER BUDGET'}")
    print(f"test accuracy {values['accuracy']:.4f}, K = {values['K']}")
    return 0 if total < BUDGET_S else 1


if __name__ == "__main__":
    raise SystemExit(main())
