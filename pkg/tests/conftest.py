import pytest

from orliczode.realline import Grid

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record the outcome of an acceptance criterion for the summary."""

    def _rec(number: int, ok: bool, detail: str):
        prev = _ACCEPTANCE.get(number)
        ok = ok and (prev is None or prev[0])
        text = detail if prev is None else f"{prev[1]}; {detail}"
        _ACCEPTANCE[number] = (bool(ok), text)
        return ok

    return _rec


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def grid40():
    return Grid.uniform(40.0, 4001)


@pytest.fixture(scope="session")
def grid20():
    return Grid.uniform(20.0, 2001)
