import os
from pathlib import Path

import numpy as np
import pytest

from ceids import config, ensemble, synthetic

NSLKDD_DIR = Path(os.environ.get("CEIDS_NSLKDD_DIR", Path(__file__).resolve().parents[1] / "data" / "nsl-kdd"))

TOY_PER_CLASS = 300

_criteria: dict[str, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion")
    config.addinivalue_line("markers", "requires_nslkdd: needs the official NSL-KDD files")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, text = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _criteria[cid] = (status, text, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[1:])):
        status, text, secs = _criteria[cid]
        terminalreporter.write_line(f"{status}  {cid:>3}  {text}  ({secs:.1f}s)")


def toy_config(seed: int = 0) -> config.PipelineConfig:
    """Defaults except a fixed bandwidth that separates the three toy blobs."""
    cfg = config.PipelineConfig(seed=seed)
    cfg.meanshift.bandwidth = 0.2
    return cfg


def labels_array(labels):
    return np.array([int(c) for c in labels])


@pytest.fixture(scope="session")
def toy_data():
    """(train_records, train_labels, test_records, test_labels) from 3 separable blobs.

    4,500 training rows give the final network (batch 512, 30 epochs) enough steps.
    """
    train = synthetic.shuffled(*synthetic.make_blobs(TOY_PER_CLASS, seed=11), seed=12)
    test = synthetic.make_blobs(30, seed=13)
    return train[0], train[1], test[0], test[1]


@pytest.fixture(scope="session")
def toy_model(toy_data):
    records, labels, _, _ = toy_data
    return ensemble.train_pipeline(records, labels, toy_config(), seed=0)


def nslkdd_paths():
    return NSLKDD_DIR / "KDDTrain+.txt", NSLKDD_DIR / "KDDTest+.txt"


def require_nslkdd(fail: bool):
    train, test = nslkdd_paths()
    missing = [str(p) for p in (train, test) if not p.is_file()]
    if missing:
        msg = (f"official NSL-KDD files not found: {', '.join(missing)} "
               "(download KDDTrain+.txt / KDDTest+.txt and set CEIDS_NSLKDD_DIR)")
        if fail:
            pytest.fail(msg)
        pytest.skip(msg)
    return train, test
