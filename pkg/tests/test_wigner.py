import numpy as np
import pytest
from hypothesis import given

from ncwb import errors
from ncwb.wigner import (D, OMEGA, magic_boundary, pauli_pvms, phase_point_operators,
                         stabilizer_fragment, stabilizer_states, strange_state,
                         verify_subtheory_noncontextual_model, wigner_distribution, wigner_model,
                         wigner_response)

from strategies import densities


def explicit_phase_point(q, p):
    """A(q,p)|x> = w^{-2p(x-q)} |2q - x>, written out entry by entry."""
    a = np.zeros((3, 3), dtype=complex)
    for x in range(3):
        a[(2 * q - x) % 3, x] = np.exp(2j * np.pi / 3) ** (-2 * p * (x - q) % 3)
    return a


def test_phase_points_match_explicit_formula():
    ops = phase_point_operators()
    for u, (q, p) in enumerate([(q, p) for q in range(3) for p in range(3)]):
        assert np.allclose(ops[u], explicit_phase_point(q, p))


def test_phase_point_invariants():
    ops = phase_point_operators()
    assert ops.shape == (9, 3, 3)
    assert np.allclose(np.einsum("uii->u", ops), 1)
    assert np.allclose(np.einsum("uij,vji->uv", ops, ops), 3 * np.eye(9))
    assert np.allclose(ops.sum(axis=0), 3 * np.eye(3))
    assert np.isclose(OMEGA ** D, 1)


@given(densities(d=3))
def test_wigner_is_quasi_probability(rho):
    w = wigner_distribution(rho)
    assert w.sum() == pytest.approx(1)
    # reconstruction: rho = sum_u W(u) A(u)
    assert np.allclose(np.einsum("u,uij->ij", w.ravel(), phase_point_operators()), rho)


def test_response_and_distribution_reproduce_born():
    rho = stabilizer_states()["X1"]
    e = pauli_pvms()["Z"].effects[0]
    w, xi = wigner_distribution(rho), wigner_response(e)
    assert (w * xi).sum() == pytest.approx(np.trace(rho @ e).real)
    assert wigner_response(np.eye(3)) == pytest.approx(np.ones((3, 3)))


def test_stabilizer_states_have_three_points_of_weight_one_third():
    states = stabilizer_states()
    assert len(states) == 12
    for w in map(wigner_distribution, states.values()):
        vals = np.sort(w.ravel())
        assert vals == pytest.approx([0] * 6 + [1 / 3] * 3, abs=1e-12)


def test_strange_state_negative():
    w = wigner_distribution(strange_state())
    assert w.min() == pytest.approx(-1 / 3)
    assert w[0, 0] == pytest.approx(-1 / 3)


def test_dimension_check():
    with pytest.raises(errors.DimensionMismatch):
        wigner_distribution(np.eye(2) / 2)


def test_fragment_shape():
    t = stabilizer_fragment()
    assert len(t.preparations) == 13
    assert len(t.measurements) == 10
    assert sum(t.sharp) == 4


def test_model_determinism_pattern():
    t = stabilizer_fragment()
    model = wigner_model(t)
    for m, sharp in zip(t.measurements, t.sharp):
        xi = model.responses[m]
        is_det = np.all(np.isclose(xi, 0) | np.isclose(xi, 1))
        assert is_det == sharp


def test_full_witness_report():
    rep = verify_subtheory_noncontextual_model()
    assert rep.passed, rep.summary()
    names = [c.name for c in rep.children]
    assert len(names) == 7


def test_magic_boundary():
    rep = magic_boundary()
    assert rep.passed
    assert rep.details["min_mu"] == pytest.approx(-1 / 3)
