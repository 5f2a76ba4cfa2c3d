import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def criterion(request):
    """Record and assert one acceptance criterion: ``criterion(k, name, ok, detail)``."""
    lines = request.config.stash[_LINES_KEY]

    def check(k, name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {k}: {name}" + (f"  [{detail}]" if detail else "")
        lines.append(line)
        print(line)
        assert ok, line

    return check


def _order(line):
    label = line.split("criterion ")[1].split(":")[0]
    digits = "".join(ch for ch in label if ch.isdigit())
    return int(digits), label


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=_order):
            terminalreporter.write_line(line)
