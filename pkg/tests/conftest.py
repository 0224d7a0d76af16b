import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, label, ok, detail)``; returns ``ok``."""
    def record(n, label, ok, detail=""):
        _LINES.append((n, label, bool(ok), detail))
        print(f"criterion {n:>2} {label}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    by_n = {}
    for n, label, ok, detail in _LINES:
        by_n.setdefault(n, []).append((label, ok, detail))
    for n in sorted(by_n):
        parts = by_n[n]
        ok = all(p[1] for p in parts)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: "
                                    + "; ".join(f"{lab} {det}".strip() for lab, _, det in parts))
