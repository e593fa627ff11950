"""Shared pytest plumbing: acceptance-criteria summary reporting."""

acceptance_lines = []


def record_criterion(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    acceptance_lines.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
