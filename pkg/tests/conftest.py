import pytest

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion.

    Call the fixture with (number, title) at the start of the test; the
    outcome is filled in from the test's own result.
    """
    started = {}

    def start(number: int, title: str) -> None:
        started["key"] = (number, title)

    yield start
    if "key" in started:
        number, title = started["key"]
        report = getattr(request.node, "rep_call", None)
        ok = report is not None and report.passed
        detail = getattr(request.node, "acceptance_detail", "")
        ACCEPTANCE[number] = (title, ok, detail)


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    if report.when == "call":
        item.rep_call = report
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
