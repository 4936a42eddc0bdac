import numpy as np
import pytest

from rdt_assurance.weibull import (
    LifetimeData,
    ReliableLifeTarget,
    TestConfig,
    WeibullMCMCSettings,
    WeibullModel,
    WeibullPrior,
    simulate_observations,
)

# Working scale: stress already shifted so that the use stress is 0.
DESIGN_PRIOR = WeibullPrior(-9.0, 1.1, 0.01, 0.0004, 0.0, a_beta=20, b_beta=13, v_eps=0.02)
ANALYSIS_PRIOR = WeibullPrior(-8.0, 1.1, 1.0, 0.0025, 0.0, a_beta=20, b_beta=13, v_eps=0.02)
TARGET = ReliableLifeTarget(0.5, 4000.0, 0.0, 0.05)
FAST_MCMC = WeibullMCMCSettings(iterations=1200, burn_in=400)


@pytest.fixture
def design_prior():
    return DESIGN_PRIOR


@pytest.fixture
def analysis_prior():
    return ANALYSIS_PRIOR


@pytest.fixture
def target():
    return TARGET


@pytest.fixture
def fast_config():
    return TestConfig((1.0, 3.0), ANALYSIS_PRIOR, mcmc=FAST_MCMC)


def recovery_fixture(seed: int = 87) -> tuple[LifetimeData, WeibullModel]:
    """8 locations, 3 stresses, 87 items with known truth."""
    rng = np.random.default_rng(seed)
    eps = {f"L{i}": float(e) for i, e in enumerate(rng.normal(0, np.sqrt(0.3), 8))}
    truth = WeibullModel(beta=1.5, alpha0=-40.0, alpha1=1.3, eps=eps)
    sizes = [11, 11, 11, 11, 11, 11, 11, 10]
    stress_levels = (25.5, 27.6, 29.7)
    stresses, locations = [], []
    for i, m in enumerate(sizes):
        for j in range(m):
            stresses.append(stress_levels[(i + j) % 3])
            locations.append(f"L{i}")
    return simulate_observations(truth, stresses, locations, rng), truth


@pytest.fixture
def recovery_data():
    return recovery_fixture()


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance_report(request):
    """Record one status line per acceptance criterion; all lines are repeated in the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def report(criterion, status, detail):
        if isinstance(status, bool):
            status = "PASS" if status else "FAIL"
        line = f"{status} criterion {criterion}: {detail}"
        print(line)
        lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
