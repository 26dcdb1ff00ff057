"""Shared test plumbing: the acceptance suite registers one result per
criterion here, and a terminal-summary hook prints the PASS/FAIL roster."""

_ACCEPTANCE_RESULTS: list[tuple[str, str, bool, str]] = []


def record_criterion(number: str, title: str, checks: dict[str, tuple[bool, str]]):
    """Register sub-check outcomes for one acceptance criterion and assert them.

    ``checks`` maps a sub-check name to (ok, detail).  The criterion passes
    only if every sub-check does; the summary line lists each sub-check so a
    red criterion still shows which parts held.
    """
    ok = all(flag for flag, _ in checks.values())
    detail = "; ".join(
        f"{name}: {'ok' if flag else 'FAIL'} ({info})" for name, (flag, info) in checks.items()
    )
    _ACCEPTANCE_RESULTS.append((number, title, ok, detail))
    assert ok, f"criterion {number} ({title}) failed -> {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, ok, detail in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{status}] {title}")
        terminalreporter.write_line(f"    {detail}")
