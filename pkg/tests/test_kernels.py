import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncwb import _kernels
from ncwb.assign import enumerate_deterministic_assignments, enumerate_spectral_assignments
from ncwb import scenarios

BACKENDS = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])


def brute(values, radix, a, b, tol):
    out = []
    for digits in itertools.product(*(range(r) for r in radix)):
        x = values[np.arange(len(radix)), digits]
        if np.all(np.abs(a @ x - b) <= tol):
            out.append(digits)
    return np.array(out, dtype=np.int64).reshape(-1, len(radix))


@st.composite
def small_systems(draw):
    n = draw(st.integers(1, 7))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    radix = rng.integers(1, 4, size=n)
    values = np.zeros((n, 3))
    for i in range(n):
        values[i, :radix[i]] = rng.choice([0, 0.25, 0.5, 0.75, 1.0], size=radix[i], replace=False)
    m = draw(st.integers(0, 3))
    a = rng.choice([0.0, 0.0, 1.0, -1.0, 0.5], size=(m, n))
    b = rng.choice([0.0, 0.5, 1.0], size=m)
    return values, radix, a, b


@pytest.mark.parametrize("backend", BACKENDS)
@given(small_systems())
def test_kernel_matches_brute_force(backend, system):
    values, radix, a, b = system
    got = _kernels.search(values, radix, a, b, 1e-9, backend)
    assert np.array_equal(got, brute(values, radix, a, b, 1e-9))


@pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")
@given(small_systems())
def test_backends_agree(system):
    values, radix, a, b = system
    x = _kernels.search(values, radix, a, b, 1e-9, "numba")
    y = _kernels.search(values, radix, a, b, 1e-9, "numpy")
    assert np.array_equal(x, y)


def test_unsatisfiable_constant_row():
    values = np.array([[0.0, 1.0]])
    got = _kernels.search(values, np.array([2]), np.zeros((1, 1)), np.array([1.0]), 1e-9, "numpy")
    assert got.shape == (0, 1)


def test_numpy_chunking_large_frontier(monkeypatch):
    monkeypatch.setattr(_kernels, "CHUNK", 16)
    n = 9
    values = np.tile([0.0, 1.0], (n, 1))
    a = np.ones((1, n))
    got = _kernels.search(values, np.full(n, 2), a, np.array([2.0]), 1e-9, "numpy")
    assert len(got) == 36
    assert [tuple(r) for r in got] == sorted(tuple(r) for r in got)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("NCWB_DISABLE_NUMBA", "1")
    assert _kernels.default_backend() == "numpy"
    monkeypatch.delenv("NCWB_DISABLE_NUMBA")
    assert _kernels.default_backend() == ("numba" if _kernels.HAS_NUMBA else "numpy")


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.search(np.zeros((1, 1)), np.array([1]), np.zeros((0, 1)), np.zeros(0), 1e-9, "gpu")


@pytest.mark.parametrize("backend", BACKENDS)
def test_scenarios_same_on_each_backend(backend):
    assert len(enumerate_deterministic_assignments(scenarios.xyz_problem(), backend)) == 8
    assert len(enumerate_spectral_assignments(scenarios.cabello_nakamura_problem("spectral"),
                                              backend)) == 8
