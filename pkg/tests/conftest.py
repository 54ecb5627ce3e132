import os

import pytest

# constants read off the Fig-1 caption of the reference work are kept in the
# acceptance suite; the values below are derived regression constants
S1 = "0.3626684938191616+0.6450238859863952i"
Q_STAR = 129


@pytest.fixture(autouse=True)
def _no_precision_override(monkeypatch):
    monkeypatch.delenv("DECOLAB_PRECISION_BITS", raising=False)
