from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncwb import errors
from ncwb.demos import extension_properties, random_model, theory_from_model
from ncwb.measurements import OperationalTheory, build_quantum_theory, fair_coin_povm
from ncwb.ontology import (OntologicalModel, adequacy_residues, bit_flip_extension_demo,
                           check_measurement_noncontextual, check_preparation_noncontextual,
                           disagreement_measure, empirical_adequacy, fair_coin_model,
                           fair_coin_theory, interval_response, is_outcome_deterministic,
                           measurement_classes, ontic_extend, preparation_classes,
                           verify_determinism_iff_sharp)
from ncwb.scenarios import qubit_pvm

from strategies import seeds


def z_theory():
    z = qubit_pvm("z")
    return build_quantum_theory([z.effects[0], z.effects[1], np.eye(2) / 2],
                                [z, fair_coin_povm()], ["up", "down", "mixed"], ["Z", "coin"])


def z_model():
    return OntologicalModel(("u", "d"),
                            {"up": [1, 0], "down": [0, 1], "mixed": [0.5, 0.5]},
                            {"Z": [[1, 0], [0, 1]], "coin": [[0.5, 0.5], [0.5, 0.5]]})


def test_model_validation_names_offending_entry():
    with pytest.raises(errors.InvalidModel, match="'l1'"):
        OntologicalModel(("l0", "l1"), {"P": [0.5, 0.5]}, {"M": [[1, 0.5], [0, 0.4]]})
    with pytest.raises(errors.InvalidModel):
        OntologicalModel(("l0",), {"P": [0.9]}, {})
    with pytest.raises(errors.InvalidModel):
        OntologicalModel(("a", "a"), {}, {})


def test_adequacy_pass_and_fail():
    theory, model = z_theory(), z_model()
    assert empirical_adequacy(model, theory).passed
    bad = OntologicalModel(model.ontic_states, {**model.epistemic, "mixed": [0.6, 0.4]},
                           model.responses)
    rep = empirical_adequacy(bad, theory)
    assert not rep.passed
    assert rep.details["max_residue"] == pytest.approx(0.1)
    assert {v["preparation"] for v in rep.violations} == {"mixed"}


def test_label_mismatch():
    model = OntologicalModel(("u",), {"up": [1]}, {"Z": [[1], [0]]})
    with pytest.raises(errors.LabelMismatch):
        adequacy_residues(model, z_theory())


def test_outcome_determinism():
    model = z_model()
    assert is_outcome_deterministic(model, "Z")
    assert not is_outcome_deterministic(model, "coin")
    assert verify_determinism_iff_sharp(model, z_theory()).passed


def test_determinism_iff_sharp_reports_direction():
    theory = z_theory()
    m = z_model()
    det_coin = OntologicalModel(("u", "d"), m.epistemic,
                                {"Z": [[0.5, 0.5], [0.5, 0.5]], "coin": [[1, 0], [0, 1]]})
    rep = verify_determinism_iff_sharp(det_coin, theory)
    assert {v["direction"] for v in rep.violations} == {"a", "b"}


def test_equivalence_classes():
    theory = fair_coin_theory(("A", "B", "C"))
    assert measurement_classes(theory) == [[0, 1, 2]]
    t = z_theory()
    assert preparation_classes(t) == [[0], [1], [2]]


def test_measurement_noncontextuality():
    theory = fair_coin_theory(("A", "B"))
    good = fair_coin_model(("A", "B"))
    assert check_measurement_noncontextual(good, theory).passed
    bad = OntologicalModel(("l0", "l1"), {"P": [0.5, 0.5]},
                           {"A": [[1, 0], [0, 1]], "B": [[0, 1], [1, 0]]})
    assert empirical_adequacy(bad, theory).passed
    rep = check_measurement_noncontextual(bad, theory)
    assert not rep.passed
    assert rep.violations[0]["measurements"] == ["A", "B"]


def test_measurement_noncontextuality_with_relabelling():
    t = OperationalTheory(("P", "Q"), ("A", "B"),
                          ([[1, 0], [0.2, 0.8]], [[0, 1], [0.8, 0.2]]), (False, False))
    assert measurement_classes(t) == [[0], [1]]
    assert measurement_classes(t, allow_perm=True) == [[0, 1]]
    model = OntologicalModel(("x",), {"P": [1], "Q": [1]}, {"A": [[0.5], [0.5]], "B": [[0.5], [0.5]]})
    assert check_measurement_noncontextual(model, t, allow_perm=True).passed


def test_preparation_noncontextuality():
    z, x = qubit_pvm("z"), qubit_pvm("x")
    states = [np.eye(2) / 2, np.eye(2) / 2]
    theory = build_quantum_theory(states, [z, x], ["mixZ", "mixX"], ["Z", "X"])
    same = OntologicalModel(("a", "b"), {"mixZ": [0.5, 0.5], "mixX": [0.5, 0.5]},
                            {"Z": [[1, 0], [0, 1]], "X": [[0, 1], [1, 0]]})
    assert check_preparation_noncontextual(same, theory).passed
    diff = OntologicalModel(("a", "b", "c", "d"),
                            {"mixZ": [0.5, 0.5, 0, 0], "mixX": [0, 0, 0.5, 0.5]},
                            {"Z": [[1, 0, 1, 0], [0, 1, 0, 1]], "X": [[1, 0, 1, 0], [0, 1, 0, 1]]})
    assert empirical_adequacy(diff, theory).passed
    rep = check_preparation_noncontextual(diff, theory)
    assert not rep.passed
    assert rep.violations[0]["preparations"] == ["mixZ", "mixX"]


def test_interval_response_exact_lengths():
    r = interval_response(np.array([[0.1], [0.2], [0.7]]))
    assert r.cuts[0][1] == Fraction(0.1)
    assert np.array_equal(r.lengths(), [[0.1], [0.2], [0.7]])
    assert r.indicator(0, 0, 0) == 1
    assert r.indicator(1, 0, Fraction(0.1)) == 1
    assert r.indicator(2, 0, 1) == 1
    assert r.indicator(0, 0, 1) == 0


def test_ontic_extend_rejects_unknown():
    with pytest.raises(errors.LabelMismatch):
        ontic_extend(fair_coin_model(), ["nope"])


@given(seeds, st.integers(1, 10), st.integers(1, 5))
def test_extension_properties_random(seed, n_states, n_outcomes):
    model = random_model(np.random.default_rng(seed), n_states, n_outcomes)
    rep = extension_properties(model, theory_from_model(model))
    assert rep.passed, rep.violations


@given(seeds)
def test_discretized_extension_is_equivalent_finite_model(seed):
    model = random_model(np.random.default_rng(seed), n_preps=2, n_meas=2)
    theory = theory_from_model(model)
    finite = ontic_extend(model).to_finite_model()
    assert empirical_adequacy(finite, theory, tol=1e-12).passed
    for m in finite.responses:
        assert is_outcome_deterministic(finite, m)


def test_bit_flip_extension():
    rep = bit_flip_extension_demo()
    assert rep.passed, rep.summary()
    model = fair_coin_model(("M", "M'"))
    ext = ontic_extend(model, "M").with_relabelled("M", (1, 0), "M'")
    assert np.array_equal(ext.marginal_response("M"), ext.marginal_response("M'"))
    assert disagreement_measure(ext, "M", "M'", 0, 0) == 1
    assert disagreement_measure(ext, "M", "M", 0, 0) == 0
