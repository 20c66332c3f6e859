import os

import pytest
from hypothesis import settings

# reproducible by default; use --hypothesis-profile=random to explore
settings.register_profile("repro", derandomize=True)
settings.register_profile("random", derandomize=False)
settings.load_profile("repro")

RESULTS = []


def pytest_addoption(parser):
    parser.addoption(
        "--seed",
        type=int,
        default=int(os.environ.get("SDATTACK_SEED", "0")),
        help="base seed for the randomized property suites",
    )


@pytest.fixture(scope="session")
def base_seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def record():
    """Log one PASS/FAIL line for the acceptance summary."""

    def _record(number, ok, text):
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {text}"
        RESULTS.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
