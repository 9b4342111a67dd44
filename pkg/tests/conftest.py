import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from renyi_sdpi import MarkovKernel, ProbabilityMeasure

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def _weight(zeros):
    # exact zeros exercise the support conventions; tiny positives would only
    # test underflow of the linear-domain reference formulas
    pos = st.floats(1e-3, 1.0)
    return st.one_of(st.just(0.0), pos) if zeros else pos


@st.composite
def measures(draw, n=None, min_n=2, max_n=6, zeros=False):
    n = draw(st.integers(min_n, max_n)) if n is None else n
    w = np.array(draw(st.lists(_weight(zeros), min_size=n, max_size=n)))
    if w.sum() <= 0:
        w[0] = 1.0
    return ProbabilityMeasure(w / w.sum())


@st.composite
def kernels(draw, n_in=None, n_out=None, max_n=6, zeros=False):
    n_in = draw(st.integers(2, max_n)) if n_in is None else n_in
    n_out = draw(st.integers(2, max_n)) if n_out is None else n_out
    rows = []
    for _ in range(n_in):
        r = np.array(draw(st.lists(_weight(zeros), min_size=n_out, max_size=n_out)))
        if r.sum() <= 0:
            r[0] = 1.0
        rows.append(r / r.sum())
    return MarkovKernel(np.array(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_measure(rng, n):
    w = rng.dirichlet(np.ones(n))
    return ProbabilityMeasure(w / w.sum())


def random_kernel(rng, n_in, n_out):
    return MarkovKernel(rng.dirichlet(np.ones(n_out), size=n_in))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
