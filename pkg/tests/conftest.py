import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from equivocation.dist import CANON, load_joint

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def canon():
    return CANON


def corpus(count, max_a, max_e, seed0=0):
    """Seeded random sources with sizes up to ``max_a x max_e``."""
    from equivocation.dist import random_joint

    out = []
    for seed in range(seed0, seed0 + count):
        rng = np.random.default_rng(10_000 + seed)
        a, e = rng.integers(1, max_a + 1), rng.integers(1, max_e + 1)
        out.append(random_joint(seed, int(a), int(e)))
    return out


@st.composite
def joint_sources(draw, max_a=4, max_e=4, allow_zeros=True):
    a = draw(st.integers(1, max_a))
    e = draw(st.integers(1, max_e))
    lo = 0.0 if allow_zeros else 0.01
    cells = draw(st.lists(st.floats(lo, 1.0), min_size=a * e, max_size=a * e))
    p = np.array([x if x > 1e-6 else 0.0 for x in cells]).reshape(a, e)
    if p.sum() < 1e-3:
        p = p + 0.1
    return load_joint(p / p.sum())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
