import pytest


def pytest_addoption(parser):
    parser.addoption("--skip-stretch", action="store_true", default=False,
                     help="skip the genus-4 quartic kernel runs (a few minutes)")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-stretch"):
        return
    skip = pytest.mark.skip(reason="--skip-stretch given")
    for item in items:
        if "stretch" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when == "call":
                lines += [v for k, v in rep.user_properties if k == "criterion"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
