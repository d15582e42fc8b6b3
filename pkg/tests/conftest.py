import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from twoweight import Instance, Measure, OptimizerOptions, build_tree

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FAST = OptimizerOptions(restarts=8)


def fixture_f1():
    """Depth 2, sigma = (1,2,1,4), omega = (2,1,1,1), three coefficients, (p, q) = (2, 0.8)."""
    tree = build_tree(1, 2)
    lam = np.zeros(tree.n_cubes)
    lam[tree.root] = 1.0
    lam[tree.cube_from_path("1:0")] = 0.5
    lam[tree.cube_from_path("2:3")] = 2.0
    return Instance(Measure(tree, [1, 2, 1, 4]), Measure(tree, [2, 1, 1, 1]), lam, 2.0, 0.8)


def fixture_f2():
    """Depth 2, five coefficients, (p, q) = (2, 1.5)."""
    tree = build_tree(1, 2)
    lam = np.zeros(tree.n_cubes)
    for path, v in {"0:0": 1.0, "1:0": 1.5, "1:1": 0.7, "2:0": 2.0, "2:2": 1.0}.items():
        lam[tree.cube_from_path(path)] = v
    return Instance(Measure(tree, [1, 1, 2, 1]), Measure(tree, [1, 3, 1, 1]), lam, 2.0, 1.5)


@pytest.fixture
def f1():
    return fixture_f1()


@pytest.fixture
def f2():
    return fixture_f2()


masses = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)
coeffs = st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=1e3))


@st.composite
def trees(draw, max_depth=3, dims=(1, 2)):
    d = draw(st.sampled_from(dims))
    depth = draw(st.integers(0, max_depth if d == 1 else 1))
    return build_tree(d, depth)


@st.composite
def measures(draw, tree, allow_zero=True):
    elem = st.one_of(st.just(0.0), masses) if allow_zero else masses
    return Measure(tree, draw(st.lists(elem, min_size=tree.n_leaves, max_size=tree.n_leaves)))


@st.composite
def families(draw, tree, elements=coeffs):
    return np.array(draw(st.lists(elements, min_size=tree.n_cubes, max_size=tree.n_cubes)))


@st.composite
def leaf_functions(draw, tree):
    return np.array(draw(st.lists(st.one_of(st.just(0.0), masses), min_size=tree.n_leaves, max_size=tree.n_leaves)))


@st.composite
def tree_measure_family(draw, max_depth=3, allow_zero=True):
    tree = draw(trees(max_depth))
    return tree, draw(measures(tree, allow_zero)), draw(families(tree))
