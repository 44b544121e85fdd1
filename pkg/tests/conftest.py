import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import Harness, Wallet  # noqa: E402


@pytest.fixture
def harness() -> Harness:
    return Harness()


@pytest.fixture
def issuer(harness) -> Wallet:
    w = Wallet()
    harness.register(w, "Issuer")
    return w


@pytest.fixture
def trader(harness) -> Wallet:
    w = Wallet()
    harness.register(w, "Trader")
    return w


@pytest.fixture
def auditor(harness) -> Wallet:
    w = Wallet()
    harness.register(w, "Auditor")
    return w
