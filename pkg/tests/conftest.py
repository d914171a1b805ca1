from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# criterion number -> (passed, title, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def criterion():
    def record(number: int, title: str, checks: list[tuple[str, bool]]) -> None:
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{name} {'ok' if passed else 'FAILED'}" for name, passed in checks)
        ACCEPTANCE[number] = (ok, title, detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}")
        failed = [name for name, passed in checks if not passed]
        assert not failed, f"criterion {number} failed: {', '.join(failed)}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number}: {title} | {detail}")
