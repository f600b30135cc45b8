from __future__ import annotations

import pytest

from bookforge.providers import (
    MockEmbedder,
    MockProvider,
    ProviderConfig,
    RetryingClient,
)

# acceptance tests register one line per criterion here; the summary hook
# prints them after the run so the pass/fail ledger is always visible
ACCEPTANCE_RESULTS: list = []


def record_acceptance(criterion: str, passed: bool) -> None:
    ACCEPTANCE_RESULTS.append((criterion, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {criterion}")


@pytest.fixture
def mock_gen_client():
    return RetryingClient(
        provider=MockProvider(seed=7),
        config=ProviderConfig(max_retries=2, backoff_base=0.001),
        sleep=lambda _: None,
    )


@pytest.fixture
def mock_embed_client():
    return RetryingClient(
        embedder=MockEmbedder(),
        config=ProviderConfig(max_retries=2, backoff_base=0.001),
        sleep=lambda _: None,
    )
