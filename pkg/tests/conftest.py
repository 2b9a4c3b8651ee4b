import pytest

# filled in by test_acceptance; one line per criterion
ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda s: int(s[1:])):
            terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def report():
    def _report(cid: str, ok: bool, detail: str):
        line = f"{cid} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE[cid] = line
        print(line)
        return ok
    return _report
