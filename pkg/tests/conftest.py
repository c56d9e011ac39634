from contextlib import contextmanager

import pytest

# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.notes: list[str] = []

    def note(self, text: str) -> None:
        self.notes.append(text)


@pytest.fixture
def criterion():
    @contextmanager
    def run(number: int, title: str):
        c = Criterion(number, title)
        try:
            yield c
        except BaseException as exc:
            ACCEPTANCE[number] = (False, f"{title}: {type(exc).__name__}: {exc}".splitlines()[0])
            raise
        ACCEPTANCE[number] = (True, "; ".join([title] + c.notes))
    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
