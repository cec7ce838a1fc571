"""Shared fixtures plus the acceptance-criteria reporting hook."""

from __future__ import annotations

import pytest

from mirrorlearn.experiment import Condition, ExperimentConfig
from mirrorlearn.mirror_env import EnvConfig

# One (name, passed, detail) entry per acceptance criterion, appended by
# tests/test_acceptance.py and echoed after the run so every criterion gets
# its own visible pass/fail line even when the suite is green.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")


@pytest.fixture
def short_config(tmp_path):
    """One-period sim(C+F) config writing into the test's tmp dir."""
    return ExperimentConfig(
        condition=Condition.SIM_CONTROL_FEEDBACK,
        seed=7,
        total_steps=800,
        env=EnvConfig(num_periods=1),
        out_dir=str(tmp_path),
    )
