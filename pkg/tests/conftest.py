import time

import pytest

from rfi_mvue.harness import SweepConfig, run_sweep

FULL_TRIALS = 100_000
FULL_SEED = 20240601


@pytest.fixture(scope="session")
def full_sweep():
    """M = 1..10 at T = 100,000, single worker, with wall time in seconds."""
    config = SweepConfig(trials_per_m=FULL_TRIALS, master_seed=FULL_SEED)
    start = time.perf_counter()
    result = run_sweep(config, workers=1)
    return result, time.perf_counter() - start


ACCEPTANCE_LINES: list = []


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""
    entries = []

    def record(label: str, passed: bool, detail: str) -> bool:
        entries.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
        return passed

    yield record
    for line in entries:
        print(line)
        ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
