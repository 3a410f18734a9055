"""Shared pytest hooks: the acceptance report printed after the run."""

# criterion number -> list of (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for p, _ in parts)
        tr.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}")
        for p, detail in parts:
            tr.write_line(f"    [{'ok' if p else 'FAIL'}] {detail}")
