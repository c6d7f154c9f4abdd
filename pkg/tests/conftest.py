import math

import numpy as np
import pytest

from addcomplexity.field import assemble, epsilon_d, field_from_marginals
from addcomplexity.spectra import SequenceModel, SigmaRule, explicit_spectrum

ACCEPTANCE_LINES = []


@pytest.fixture
def two_marginal_model():
    return SequenceModel.explicit(
        [explicit_spectrum(1.0, [0.5, 0.5]), explicit_spectrum(0.5, [0.25, 0.25])]
    )


@pytest.fixture
def two_marginal_field(two_marginal_model):
    return assemble(two_marginal_model, 2)


@pytest.fixture
def log_sigma():
    return SigmaRule("log_affine", 2.0, 1.0)


def random_values(rng, n):
    """Non-increasing list of length n from a geometric/random/tied mix."""
    if n == 0:
        return []
    kind = rng.integers(4)
    if kind == 0:
        a, q = rng.uniform(0.1, 2.0), rng.uniform(0.2, 0.95)
        vals = [a * q**k for k in range(n)]
    elif kind == 1:
        vals = list(rng.uniform(0.0, 1.5, size=n))
    elif kind == 2:
        # Korobov-like pairs
        b, s = rng.uniform(0.2, 2.0), rng.uniform(1.2, 4.0)
        vals = [b * ((k + 2) // 2) ** -s for k in range(n)]
    else:
        # values from a small shared pool, so marginals tie with each other
        vals = list(rng.choice([1.0, 0.5, 0.25, 0.125, 0.0625], size=n))
    return sorted((float(v) for v in vals), reverse=True)


def random_explicit_field(rng, d_max=8, len_max=16):
    while True:
        d = int(rng.integers(1, d_max + 1))
        marginals = [
            explicit_spectrum(float(rng.uniform(0.0, 2.0)), random_values(rng, int(rng.integers(0, len_max + 1))))
            for _ in range(d)
        ]
        if sum(m.reduced_trace for m in marginals) > 0:
            return field_from_marginals(marginals)


def eps_grid(fld, count=10):
    e = epsilon_d(fld)
    return [float(x) for x in np.linspace(0.0, e, count + 2)[1:-1]]


def brute_force_n(fld, eps, rtol=1e-12):
    """Concatenate every eigenvalue plus lambda0, sort, scan prefix sums.

    A prefix sum within ``rtol`` (relative) of the threshold meets it;
    ``rtol=0`` gives the strict comparison.
    """
    vals = [fld.lambda0_sum]
    for m in fld.marginals:
        vals.extend(m.values())
    vals.sort(reverse=True)
    threshold = (1.0 - eps * eps) * math.fsum(vals)
    for n in range(1, len(vals) + 1):
        if math.fsum(vals[:n]) >= threshold * (1.0 - rtol):
            return n
    raise AssertionError("threshold never reached")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
