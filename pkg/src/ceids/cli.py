"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data/model-file error, 4 config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import container, ensemble
from .config import apply_override, dump_config, load_config
from .data import COLUMNS, ClassLabel, class_counts, load_dataset, sample_records
from .errors import CeidsError, ConfigError, StageError
from .evaluation import confusion, format_report, metrics
from .preprocess import apply_minmax, encode_records, fit_minmax, fit_nominal_encoder

log = logging.getLogger("ceids")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONFIG = 0, 2, 3, 4


def _setup_logging(log_path=None, verbose=False):
    root = logging.getLogger("ceids")
    root.setLevel(logging.INFO)
    root.handlers.clear()
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.INFO if verbose else logging.WARNING)
    console.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(console)
    if log_path:
        fh = logging.FileHandler(log_path, mode="w", encoding="utf-8")
        fh.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(fh)


def _labels(pairs):
    return [r for r, _ in pairs], [c for _, c in pairs]


def cmd_ingest(args) -> int:
    rows = []
    for name, path in (("train", args.train), ("test", args.test)):
        if path is None:
            continue
        start = time.perf_counter()
        pairs = load_dataset(path)
        counts = class_counts(c for _, c in pairs)
        rows.append((name, len(pairs), counts, time.perf_counter() - start))
    if not rows:
        print("nothing to ingest: pass --train and/or --test", file=sys.stderr)
        return EXIT_USAGE
    for name, total, counts, secs in rows:
        if args.summary:
            cells = "  ".join(f"{c.display}={counts[c]}" for c in ClassLabel)
            print(f"{name}: {total} records  {cells}  ({secs:.2f}s)")
        else:
            print(f"{name}: {total} records")
    return EXIT_OK


def cmd_preprocess(args) -> int:
    records, labels = _labels(load_dataset(args.inp))
    if args.apply:
        encoder, scaler = container.load_preprocessor(args.scaler)
        x = encode_records(records, encoder)
    else:
        encoder = fit_nominal_encoder(records)
        x = encode_records(records, encoder)
        scaler = fit_minmax(x)
        container.save_preprocessor(encoder, scaler, args.scaler)
    x = apply_minmax(x, scaler)
    out = np.column_stack([x, np.asarray([int(c) for c in labels], dtype=float)])
    np.savetxt(args.out, out, delimiter=",", header=",".join(COLUMNS) + ",label", comments="", fmt="%.17g")
    print(f"wrote {x.shape[0]} rows to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    train_path = args.train or cfg.paths.train
    out = args.out or cfg.paths.model
    if train_path is None or out is None:
        print("train needs --train and --out (or paths.train / paths.model in the config)", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        cfg.seed = args.seed
    for key, value in (("meanshift.bandwidth", args.bandwidth), ("meanshift.subsample", args.ms_subsample),
                       ("meanshift.tol", args.ms_tol), ("meanshift.max_iter", args.ms_max_iter)):
        if value is not None:
            apply_override(cfg, key, value)
    _setup_logging(args.log or f"{out}.log", args.verbose)
    pairs = load_dataset(train_path)
    pairs = sample_records(pairs, args.subsample, cfg.seed)
    log.info("training on %d records from %s", len(pairs), train_path)
    start = time.perf_counter()
    records, labels = _labels(pairs)
    model = ensemble.train_pipeline(records, labels, config=cfg, seed=cfg.seed)
    container.save_model(model, out)
    log.info("K = %d", model.n_clusters)
    for i, cm in enumerate(model.clusters):
        s = cm.selection
        log.info("per_cluster_selection[%d] = %s dnn=%.6f svm=%.6f n=%d%s", i, cm.kind, s.dnn_accuracy,
                 s.svm_accuracy, s.n_records, " fallback" if s.fallback else "")
    log.info("training time %.1fs; model written to %s", time.perf_counter() - start, out)
    _, values = evaluation_report(model, records, labels)
    for key in ("accuracy", "precision", "recall", "f_score", "tpr", "fpr"):
        log.info("train_%s = %r", key, values[key])
    print(f"model written to {out} (K = {model.n_clusters})")
    return EXIT_OK


def evaluation_report(model, records, labels) -> tuple[str, dict]:
    preds, _ = ensemble.predict_batch(model, records)
    cm = confusion(preds, labels)
    weighted = metrics(cm, "weighted")
    binary = metrics(cm, "binary")
    values = dict(weighted.as_dict())
    values.update({f"binary_{k}": v for k, v in binary.as_dict().items()})
    values["K"] = model.n_clusters
    values["per_cluster_selection"] = ";".join(
        f"{i}:{c.kind}:dnn={c.selection.dnn_accuracy:.6f}:svm={c.selection.svm_accuracy:.6f}"
        for i, c in enumerate(model.clusters))
    values["n_records"] = cm.total
    values["confusion"] = ";".join(",".join(str(v) for v in row) for row in cm.counts)
    text = "\n\n".join([
        format_report(weighted, "5-class, support-weighted (percent)"),
        format_report(binary, "Normal vs Attack (percent)"),
        "confusion (rows = truth, cols = prediction; "
        + ", ".join(c.display for c in ClassLabel) + ")\n"
        + "\n".join(" ".join(f"{v:7d}" for v in row) for row in cm.counts),
        f"K = {model.n_clusters}",
    ])
    return text, values


def write_kv(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in values.items():
            fh.write(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n")


def cmd_evaluate(args) -> int:
    _setup_logging(args.log, args.verbose)
    model = container.load_model(args.model)
    records, labels = _labels(load_dataset(args.test))
    text, values = evaluation_report(model, records, labels)
    print(text)
    report = args.report or f"{args.model}.report"
    write_kv(report, values)
    for k, v in values.items():
        log.info("%s = %s", k, v)
    print(f"\nreport written to {report}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = container.load_model(args.model)
    records, _ = _labels(load_dataset(args.inp))
    preds, scores = ensemble.predict_batch(model, records)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("label," + ",".join(f"score_{c.display}" for c in ClassLabel) + "\n")
        for p, s in zip(preds, scores):
            fh.write(ClassLabel(int(p)).display + "," + ",".join(repr(float(v)) for v in s) + "\n")
    print(f"wrote {len(records)} predictions to {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    model = container.load_model(args.model)
    print(f"format_version = {model.format_version}")
    print(f"K = {model.n_clusters}")
    print(f"bandwidth = {model.meanshift.bandwidth!r}")
    for i, cm in enumerate(model.clusters):
        s = cm.selection
        print(f"cluster {i}: {cm.kind} (dnn {s.dnn_accuracy:.4f}, svm {s.svm_accuracy:.4f}, "
              f"n={s.n_records}{', fallback' if s.fallback else ''})")
    print("config:")
    print(dump_config(model.config), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ceids", description="Cluster-ensemble intrusion detection on NSL-KDD.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="parse NSL-KDD files and report class counts")
    s.add_argument("--train")
    s.add_argument("--test")
    s.add_argument("--summary", action="store_true")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("preprocess", help="encode + Min-Max scale a raw file to a CSV matrix")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--scaler", required=True, help="encoder/scaler container (written, or read with --apply)")
    s.add_argument("--apply", action="store_true", help="use an existing --scaler instead of fitting")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("train", help="train the full ensemble")
    s.add_argument("--train")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--log", help="run log path (default: <out>.log)")
    s.add_argument("--subsample", type=int, help="seeded subsample of the training file")
    s.add_argument("--bandwidth", help="mean-shift bandwidth: auto or a positive value")
    s.add_argument("--ms-subsample", help="points used to fit mean-shift")
    s.add_argument("--ms-tol", help="mean-shift convergence tolerance")
    s.add_argument("--ms-max-iter", help="mean-shift iteration cap")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="score a model on a labelled file")
    s.add_argument("--model", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--report", help="key-value report path (default: <model>.report)")
    s.add_argument("--log")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("predict", help="classify records")
    s.add_argument("--model", required=True)
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("report", help="summarize a saved model")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_report)
    return p


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    return EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_DATA


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (CeidsError, OSError, UnicodeDecodeError) as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return _exit_code(exc)


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
