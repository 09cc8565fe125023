import pytest

from gentree.programs import FIG2_SPACE, builtin_interactions


@pytest.fixture(scope="session")
def fig2_space():
    return FIG2_SPACE


@pytest.fixture(scope="session")
def fig2_truth():
    return builtin_interactions("fig2")


@pytest.fixture(scope="session")
def fig3(fig2_space):
    """Seven fixed fig2 configurations; c1..c3 play the role of an initial sample."""
    S = fig2_space
    return {
        "c1": S.config(s=1, t=1, u=0, v=0, a=0, b=1, c=2, d=1, e=0),
        "c2": S.config(s=0, t=1, u=1, v=0, a=2, b=0, c=0, d=2, e=2),
        "c3": S.config(s=1, t=0, u=1, v=1, a=1, b=2, c=1, d=0, e=1),
        "c4": S.config(s=0, t=1, u=1, v=1, a=1, b=1, c=0, d=1, e=0),
        "c5": S.config(s=0, t=0, u=0, v=0, a=0, b=2, c=2, d=0, e=1),
        "c6": S.config(s=0, t=1, u=0, v=0, a=2, b=0, c=1, d=2, e=2),
        "c7": S.config(s=0, t=1, u=0, v=1, a=0, b=0, c=1, d=2, e=2),
    }


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; returns the verdict so tests can assert on it."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _CRITERIA[number] = line
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
