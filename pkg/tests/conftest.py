import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def pass_line(name, detail=""):
    """One visible line per acceptance criterion."""
    print(f"[PASS] {name}" + (f": {detail}" if detail else ""))
