import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synthetic import health_training_corpus, separable_corpus  # noqa: E402

from reliable_snippets.corpus import InterventionCondition  # noqa: E402
from reliable_snippets.viewpoint import KeywordClassifier, train_baseline  # noqa: E402


@pytest.fixture
def ic():
    return InterventionCondition("roselle", "hypertension")


@pytest.fixture
def keyword_model():
    return KeywordClassifier()


@pytest.fixture(scope="session")
def separable_model():
    return train_baseline(separable_corpus(), seed=1)


@pytest.fixture(scope="session")
def health_model():
    return train_baseline(health_training_corpus(), seed=0)


_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("acceptance") and (report.when == "call" or report.failed):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance_results.append((report.outcome, doc))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, doc in _acceptance_results:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {doc}")
