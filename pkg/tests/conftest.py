import os
from pathlib import Path

import numpy as np
import pytest

from unhide.data import load_ml100k, split
from unhide.mf import train_pmf

ML100K_DIR = Path(os.environ.get("UNHIDE_ML100K", Path(__file__).resolve().parents[1] / "data" / "ml-100k"))


@pytest.fixture(scope="session")
def ml100k_dir():
    if not (ML100K_DIR / "u.data").exists():
        pytest.skip(f"MovieLens-100K not found at {ML100K_DIR} (run scripts/fetch_ml100k.py)")
    return ML100K_DIR


@pytest.fixture(scope="session")
def ml100k(ml100k_dir):
    return load_ml100k(ml100k_dir)


@pytest.fixture(scope="session")
def ml100k_pmf(ml100k):
    """Default-configured factor model on a 70/10/20 by-rating split (seed 0)."""
    dataset = ml100k[0]
    part = split(len(dataset), mode="by-rating", seed=0)
    return train_pmf(dataset, part.train, random_state=0), part


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


class AcceptanceLog:
    """Outcome per acceptance criterion; several checks of one criterion are ANDed."""

    def __init__(self):
        self.entries = {}

    def record(self, criterion, ok, detail):
        self.entries.setdefault(criterion, []).append((ok, detail))
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        print(f"criterion {criterion}: {status} {detail}")
        return ok

    def line(self, criterion):
        parts = self.entries[criterion]
        oks = [ok for ok, _ in parts]
        if all(ok is None for ok in oks):
            status = "SKIP"
        else:
            status = "PASS" if all(ok is not False for ok in oks) else "FAIL"
        return f"criterion {criterion:>2}: {status}  " + "; ".join(d for _, d in parts)


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance(pytestconfig):
    return pytestconfig.stash[ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_KEY, None)
    if not log or not log.entries:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(log.entries, key=int):
        terminalreporter.write_line(log.line(criterion))
