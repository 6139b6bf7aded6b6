def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criteria pass/fail lines past output capture."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
