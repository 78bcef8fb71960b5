import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncwb import errors
from ncwb.measurements import (Povm, build_quantum_theory, coarse_grain, computational_pvm,
                               convex_mix, fair_coin_naimark_pair, fair_coin_povm, naimark_extend,
                               post_process, pvm_from_basis, reduce, spectral_realization,
                               trine_povm, trine_projectors, verify_P1)
from ncwb.operators import basis_projector
from ncwb.scenarios import qubit_pvm, random_density

from oracles import partial_trace_ancilla
from strategies import densities, effects, seeds


def random_povm(rng, d, k):
    """K-outcome POVM from a random isometry (independent of ncwb.naimark)."""
    z = rng.standard_normal((d * k, d)) + 1j * rng.standard_normal((d * k, d))
    v, _ = np.linalg.qr(z)
    blocks = v.reshape(k, d, d)
    return Povm(np.array([b.conj().T @ b for b in blocks]))


def test_povm_validation():
    with pytest.raises(errors.InvalidPovm):
        Povm(np.array([np.eye(2) / 2, np.eye(2) / 3]))
    with pytest.raises(errors.InvalidPovm):
        Povm(np.array([np.eye(2), np.eye(2) * 0]), labels=("a", "a"))
    with pytest.raises(errors.InvalidPovm):
        Povm(np.array([np.diag([1.5, 0]), np.diag([-0.5, 1])]))


def test_sharpness():
    assert computational_pvm(3).is_sharp()
    assert not fair_coin_povm().is_sharp()
    assert not trine_povm().is_sharp()


def test_trine_projectors_at_120_degrees():
    pis = trine_projectors()
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.trace(pis[i] @ pis[j]).real == pytest.approx(0.25)
    assert np.allclose(trine_povm().effects.sum(axis=0), np.eye(2), atol=1e-12)


def test_probabilities_sum_to_one(rng):
    m = random_povm(rng, 3, 4)
    p = m.probabilities(random_density(rng, 3))
    assert p.sum() == pytest.approx(1.0)


@given(seeds, st.integers(1, 3), st.integers(1, 4), st.integers(1, 4))
def test_post_processing_commutes_with_born(seed, d, k, j):
    rng = np.random.default_rng(seed)
    m = random_povm(rng, d, k)
    s = rng.dirichlet(np.ones(j), size=k).T
    rho = random_density(rng, d)
    assert np.allclose(post_process(m, s).probabilities(rho), s @ m.probabilities(rho), atol=1e-12)


def test_post_process_rejects_bad_map():
    with pytest.raises(errors.NotStochastic):
        post_process(fair_coin_povm(), [[1, 0.5], [0, 0.4]])
    with pytest.raises(errors.DimensionMismatch):
        post_process(fair_coin_povm(), np.eye(3))


def test_coarse_grain_sums_blocks():
    m = Povm(np.array([np.eye(2) / 4] * 4), labels="abcd")
    c = coarse_grain(m, [("a", "b"), ("c",), ("d",)])
    assert c.labels == ("a+b", "c", "d")
    assert np.allclose(c["a+b"], np.eye(2) / 2)
    with pytest.raises(errors.InvalidPartition):
        coarse_grain(m, [("a",), ("b", "c")])
    with pytest.raises(errors.InvalidPartition):
        coarse_grain(m, [("a", "b"), ("b", "c", "d")])


def test_convex_mix():
    z, x = qubit_pvm("z"), qubit_pvm("x")
    mix = convex_mix([z, x], [0.25, 0.75])
    assert np.allclose(mix.effects, 0.25 * z.effects + 0.75 * x.effects)
    with pytest.raises(errors.WeightError):
        convex_mix([z, x], [0.5, 0.6])
    with pytest.raises(errors.DimensionMismatch):
        convex_mix([z, computational_pvm(3)], [0.5, 0.5])


def test_naimark_pair_reductions():
    ext1, ext2 = fair_coin_naimark_pair()
    half = np.eye(2) / 2
    r1 = ext1.reduced()
    assert len(r1) == 2 and np.allclose(r1.effects, half, atol=1e-9)
    r2 = ext2.reduced()
    assert len(r2) == 3
    assert np.allclose(r2.effects[:2], half, atol=1e-9)
    assert np.allclose(r2.effects[2], 0, atol=1e-12)
    assert len(ext2.reduced(drop_zero=True)) == 2
    assert ext2.extends(fair_coin_povm(), drop_zero=True)


def test_naimark_pair_distinguishing_state():
    ext1, ext2 = fair_coin_naimark_pair()
    state = np.kron(np.eye(2) / 2, basis_projector(2, 3))
    assert ext1.joint_pvm.probabilities(state) == pytest.approx([0.5, 0.5], abs=1e-9)
    assert ext2.joint_pvm.probabilities(state) == pytest.approx([0, 0, 1], abs=1e-9)


def test_reduce_matches_independent_partial_trace(rng):
    ext1, _ = fair_coin_naimark_pair()
    rho_a = random_density(rng, 3)
    red = reduce(ext1.joint_pvm, rho_a, 2)
    lift = np.kron(np.eye(2), rho_a)
    for p, e in zip(ext1.joint_pvm.effects, red.effects):
        assert np.allclose(partial_trace_ancilla(lift @ p, 2, 3), e)


@given(seeds, st.integers(1, 3), st.integers(2, 4))
def test_naimark_extend_round_trip(seed, d, k):
    rng = np.random.default_rng(seed)
    m = random_povm(rng, d, k)
    ext = naimark_extend(m)
    assert ext.joint_pvm.is_sharp(tol=1e-8)
    assert ext.extends(m, tol=1e-9)
    rho = random_density(rng, d)
    joint = np.kron(rho, ext.ancilla_state)
    assert np.allclose(ext.joint_pvm.probabilities(joint), m.probabilities(rho), atol=1e-9)


@given(effects())
def test_spectral_realization_round_trip(e):
    real = spectral_realization(e)
    rebuilt = post_process(real.pvm, real.stochastic).effects[real.j0]
    assert np.allclose(rebuilt, e, atol=1e-9)
    assert real.pvm.is_sharp()
    interior = np.any((real.eigenvalues > 1e-7) & (real.eigenvalues < 1 - 1e-7))
    assert real.p2_witness == interior


def test_quantum_theory_table_and_sharpness():
    rho = np.diag([1.0, 0.0])
    t = build_quantum_theory([rho, np.eye(2) / 2], [qubit_pvm("z"), fair_coin_povm()],
                             ["up", "mixed"], ["Z", "coin"])
    assert t.probabilities("Z", "up") == pytest.approx([1, 0])
    assert t.probabilities("coin", "up") == pytest.approx([0.5, 0.5])
    assert t.sharp == (True, False)
    with pytest.raises(errors.LabelMismatch):
        t.prep_index("down")
    with pytest.raises(errors.DimensionMismatch):
        build_quantum_theory([np.eye(3) / 3], [fair_coin_povm()])


def test_p1_passes_for_complementary_bases():
    z, x = qubit_pvm("z"), qubit_pvm("x")
    states = [z.effects[0], z.effects[1], x.effects[0], x.effects[1]]
    t = build_quantum_theory(states, [z, x])
    assert verify_P1(t).passed


def test_p1_certainty_clause_fails_without_eigenstates():
    t = build_quantum_theory([np.eye(2) / 2], [qubit_pvm("z")])
    rep = verify_P1(t)
    assert not rep.passed
    assert {v["clause"] for v in rep.violations} == {"certainty"}


@given(densities(d=2))
def test_pvm_from_basis(rho):
    m = pvm_from_basis([[1, 1], [1, -1]])
    assert m.probabilities(rho).sum() == pytest.approx(1)
