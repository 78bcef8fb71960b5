import numpy as np
import pytest
from hypothesis import given

from ncwb import errors
from ncwb.operators import (as_density, as_effect, as_hermitian, basis_projector, born,
                            eigenvalues, hs_inner, is_density, is_effect, is_hermitian,
                            is_projector, partial_trace_second, pure, spectral_decompose)

from oracles import partial_trace_ancilla
from strategies import densities, effects


def test_hermitian_check_and_symmetrised_copy():
    a = np.array([[1, 1j], [-1j, 0]])
    assert is_hermitian(a)
    h = as_hermitian(a + 1e-12)
    assert np.array_equal(h, h.conj().T)
    assert not h.flags.writeable
    with pytest.raises(errors.NotHermitian):
        as_hermitian(np.array([[0, 1], [0, 0]]))


def test_non_square_rejected():
    with pytest.raises(errors.DimensionMismatch):
        as_hermitian(np.zeros((2, 3)))


def test_effect_bounds():
    assert is_effect(np.eye(2) / 2)
    assert not is_effect(2 * np.eye(2))
    with pytest.raises(errors.OutOfRange):
        as_effect(-np.eye(2) * 0.1)


def test_density_checks():
    assert is_density(np.eye(3) / 3)
    assert not is_density(np.eye(3) / 2)
    with pytest.raises(errors.OutOfRange):
        as_density(np.diag([1.2, -0.2]))


def test_projector_detection():
    assert is_projector(pure([1, 1j]))
    assert is_projector(np.zeros((2, 2)))
    assert not is_projector(np.eye(2) / 2)


def test_spectral_merges_degenerate_eigenvalues():
    res = spectral_decompose(np.diag([0.3, 0.3 + 1e-9, 0.8]))
    assert len(res) == 2
    assert res.projectors[0].trace().real == pytest.approx(2)
    assert spectral_decompose(np.eye(2) / 2).eigenvalues == pytest.approx([0.5])


def test_spectral_diag_example():
    res = spectral_decompose(np.diag([0.7, 0.2]))
    assert res.eigenvalues == pytest.approx([0.2, 0.7])
    assert np.allclose(res.projectors[1], basis_projector(0, 2))


@given(effects())
def test_spectral_resolution_properties(e):
    res = spectral_decompose(e)
    d = e.shape[0]
    assert np.allclose(res.reconstruct(), e, atol=1e-9)
    assert np.allclose(res.projectors.sum(axis=0), np.eye(d), atol=1e-9)
    for i, p in enumerate(res.projectors):
        assert np.allclose(p @ p, p, atol=1e-9)
        for q in res.projectors[i + 1:]:
            assert np.allclose(p @ q, 0, atol=1e-9)
    assert np.all(np.diff(res.eigenvalues) >= 1e-7)


@given(densities(), effects())
def test_born_in_unit_interval(rho, e):
    if rho.shape != e.shape:
        return
    p = born(rho, e)
    assert 0.0 <= p <= 1.0
    assert p == pytest.approx(np.trace(rho @ e).real, abs=1e-12)


def test_born_rejects_non_effects_and_mismatch():
    with pytest.raises(errors.OutOfRange):
        born(np.eye(2) / 2, 3 * np.eye(2))
    with pytest.raises(errors.DimensionMismatch):
        born(np.eye(2) / 2, np.eye(3))


def test_hs_inner():
    assert hs_inner(np.eye(2), np.diag([0.25, 0.5])) == pytest.approx(0.75)


@given(densities(d=2), densities(d=3))
def test_partial_trace_of_product(a, b):
    joint = np.kron(a, b)
    assert np.allclose(partial_trace_second(joint, 2, 3), a)
    assert np.allclose(partial_trace_ancilla(joint, 2, 3), a)


def test_partial_trace_dimension_check():
    with pytest.raises(errors.DimensionMismatch):
        partial_trace_second(np.eye(6), 4, 2)


def test_eigenvalues_sorted():
    assert eigenvalues(np.diag([0.9, 0.1])) == pytest.approx([0.1, 0.9])
