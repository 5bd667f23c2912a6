import numpy as np
import pytest
from hypothesis import strategies as st

from stieltjes.derivator import make_derivator


def fixture_a():
    """g(x) = x on [0, 0.5], x + 1 on (0.5, 1]."""
    return make_derivator((0, 1), [(0, 0), (1, 1)], [(0.5, 1)])


def fixture_b():
    """Pure jump steps of size 1 at 0, 1, 2 on [0, 3]."""
    return make_derivator((0, 3), [(0, 0), (3, 0)], [(0, 1), (1, 1), (2, 1)])


def fixture_c():
    """g(x) = x on [0, 1]."""
    return make_derivator((0, 1), [(0, 0), (1, 1)])


def fixture_c2():
    """g(x) = 2x on [0, 1]."""
    return make_derivator((0, 1), [(0, 0), (1, 2)])


def fixture_flat():
    """Flat on [0.4, 0.6] with a jump at 0.2 and one at 0.8."""
    return make_derivator((0, 1), [(0, 0), (0.4, 0.4), (0.6, 0.4), (1, 0.8)], [(0.2, 0.5), (0.8, 0.25)])


FIXTURES = {"A": fixture_a, "B": fixture_b, "C": fixture_c}


@pytest.fixture
def A():
    return fixture_a()


@pytest.fixture
def B():
    return fixture_b()


@pytest.fixture
def C():
    return fixture_c()


@pytest.fixture
def C2():
    return fixture_c2()


@pytest.fixture
def flat():
    return fixture_flat()


def random_derivator(rng: np.random.Generator, max_jumps: int = 5, max_segments: int = 6):
    """Random derivator on [0, 1]; some segments are flat, a jump may sit at 0."""
    nseg = int(rng.integers(1, max_segments + 1))
    xs = np.concatenate(([0.0], np.sort(rng.choice(np.arange(1, 100), nseg - 1, replace=False)) / 100, [1.0]))
    slopes = rng.uniform(0.0, 2.0, nseg) * (rng.random(nseg) > 0.25)
    ys = np.concatenate(([0.0], np.cumsum(slopes * np.diff(xs))))
    nj = int(rng.integers(0, max_jumps + 1))
    jx = np.sort(rng.choice(np.arange(0, 100), nj, replace=False)) / 100
    jd = rng.uniform(0.1, 1.5, nj)
    return make_derivator((0, 1), np.column_stack((xs, ys)), np.column_stack((jx, jd)))


@st.composite
def derivators(draw, max_jumps: int = 5, max_segments: int = 6):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_derivator(np.random.default_rng(seed), max_jumps, max_segments)
