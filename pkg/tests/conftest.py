ACCEPTANCE_LINES = []


def record_acceptance(label, ok, detail):
    ACCEPTANCE_LINES.append(f"{label}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
