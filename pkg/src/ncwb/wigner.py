"""Discrete Wigner representation of a qutrit and its stabilizer fragment.

Phase-point operators are ``A(q, p) = D(q, p) P D(q, p)^dag`` with ``P``
the parity operator ``|x> -> |-x>`` and ``D = X^q Z^p``. Conjugation
removes the Weyl phase, so no inverse of 2 mod 3 is needed explicitly.
The resulting set obeys ``tr A = 1``, ``tr A(u)A(v) = 3 delta_uv`` and
``sum_u A(u) = 3 I``, which is all the rest of the module relies on.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from . import _config as cfg
from .errors import ConstructionFailure, DimensionMismatch
from .measurements import OperationalTheory, Povm, build_quantum_theory, convex_mix, verify_P1
from .ontology import (OntologicalModel, check_measurement_noncontextual,
                       check_preparation_noncontextual, empirical_adequacy,
                       verify_determinism_iff_sharp)
from .operators import as_density, as_hermitian, pure
from .report import Report

D = 3
OMEGA = np.exp(2j * np.pi / D)
SHIFT = np.roll(np.eye(D), 1, axis=0).astype(complex)  # X|x> = |x+1>
CLOCK = np.diag(OMEGA ** np.arange(D))                   # Z|x> = w^x |x>
PARITY = np.eye(D)[[(-x) % D for x in range(D)]].astype(complex)
PHASE_POINTS = tuple(itertools.product(range(D), repeat=2))


def _mpow(m, k):
    return np.linalg.matrix_power(m, k)


@lru_cache(maxsize=None)
def _phase_point_operators() -> np.ndarray:
    ops = []
    for q, p in PHASE_POINTS:
        disp = _mpow(SHIFT, q) @ _mpow(CLOCK, p)
        ops.append(disp @ PARITY @ disp.conj().T)
    ops = np.array(ops)
    tol = cfg.TOL_TRACE
    for a in ops:
        if np.max(np.abs(a - a.conj().T)) > tol:
            raise ConstructionFailure("phase-point operator is not Hermitian")
    traces = np.einsum("uii->u", ops)
    gram = np.einsum("uij,vji->uv", ops, ops)
    if np.max(np.abs(traces - 1)) > tol:
        raise ConstructionFailure("phase-point traces differ from 1")
    if np.max(np.abs(gram - D * np.eye(D * D))) > tol:
        raise ConstructionFailure("phase-point operators are not orthogonal")
    if np.max(np.abs(ops.sum(axis=0) - D * np.eye(D))) > tol:
        raise ConstructionFailure("phase-point operators do not sum to 3 I")
    ops.setflags(write=False)
    return ops


def phase_point_operators() -> np.ndarray:
    """The 9 operators, ordered as :data:`PHASE_POINTS` (``q`` major)."""
    return _phase_point_operators()


def phase_point_label(u) -> str:
    q, p = PHASE_POINTS[u] if isinstance(u, (int, np.integer)) else u
    return f"({q},{p})"


def _check_dim(op):
    op = as_hermitian(op)
    if op.shape != (D, D):
        raise DimensionMismatch(f"expected a qutrit operator, got shape {op.shape}")
    return op


def wigner_distribution(rho) -> np.ndarray:
    """``W(q, p) = tr(rho A(q, p)) / 3`` as a (3, 3) array indexed ``[q, p]``."""
    rho = _check_dim(as_density(rho))
    w = np.einsum("ij,uji->u", rho, phase_point_operators()).real / D
    return w.reshape(D, D)


def wigner_response(effect) -> np.ndarray:
    """``xi(q, p) = tr(E A(q, p))`` as a (3, 3) array indexed ``[q, p]``."""
    e = _check_dim(effect)
    return np.einsum("ij,uji->u", e, phase_point_operators()).real.reshape(D, D)


def pauli_bases() -> dict[str, np.ndarray]:
    """Eigenbases of Z, X, XZ and XZ^2, rows ordered by eigenvalue phase."""
    gens = {"Z": CLOCK, "X": SHIFT, "XZ": SHIFT @ CLOCK, "XZ2": SHIFT @ _mpow(CLOCK, 2)}
    out = {}
    for name, u in gens.items():
        vals, vecs = np.linalg.eig(u)
        order = np.argsort(np.round(np.angle(vals) % (2 * np.pi), 9))
        out[name] = vecs[:, order].T
    return out


def pauli_pvms() -> dict[str, Povm]:
    return {name: Povm(np.array([pure(v) for v in basis]))
            for name, basis in pauli_bases().items()}


def stabilizer_states() -> dict[str, np.ndarray]:
    return {f"{name}{k}": pure(v) for name, basis in pauli_bases().items()
            for k, v in enumerate(basis)}


def strange_state() -> np.ndarray:
    """``(|1> - |2>)/sqrt 2``, a qutrit magic state with negative Wigner value."""
    return pure(np.array([0, 1, -1]) / np.sqrt(2))


def stabilizer_fragment(extra_states=None):
    """Single-qutrit fragment: 12 stabilizer states plus I/3; 4 Pauli PVMs plus
    their 6 pairwise equal mixtures, outcomes aligned by eigenvalue index."""
    states = stabilizer_states()
    states["I/3"] = np.eye(D, dtype=complex) / D
    if extra_states:
        states.update(extra_states)
    pvms = pauli_pvms()
    povms = dict(pvms)
    for a, b in itertools.combinations(pvms, 2):
        povms[f"mix({a},{b})"] = convex_mix([pvms[a], pvms[b]], [0.5, 0.5])
    return build_quantum_theory(list(states.values()), list(povms.values()),
                                prep_labels=list(states), meas_labels=list(povms))


def wigner_model(theory) -> OntologicalModel:
    """Ontic states = phase points, mu = Wigner function, xi = Wigner response."""
    labels = tuple(phase_point_label(u) for u in range(D * D))
    epi = {p: wigner_distribution(r).ravel() for p, r in zip(theory.preparations, theory.states)}
    resp = {m: np.array([wigner_response(e).ravel() for e in povm.effects])
            for m, povm in zip(theory.measurements, theory.povms)}
    return OntologicalModel(labels, epi, resp)


def quasi_model_values(theory):
    """Raw (possibly negative) Wigner values; an OntologicalModel cannot hold them."""
    mu = {p: wigner_distribution(r).ravel() for p, r in zip(theory.preparations, theory.states)}
    xi = {m: np.array([wigner_response(e).ravel() for e in povm.effects])
          for m, povm in zip(theory.measurements, theory.povms)}
    return mu, xi


def nonnegativity(theory, tol=cfg.TOL_SUM) -> Report:
    rep = Report("Wigner nonnegativity of all preparations and effects")
    mu, xi = quasi_model_values(theory)
    for p, w in mu.items():
        if w.min() < -tol:
            rep.violations.append({"preparation": p, "min": float(w.min())})
    for m, r in xi.items():
        if r.min() < -tol or r.max() > 1 + tol:
            rep.violations.append({"measurement": m, "min": float(r.min()), "max": float(r.max())})
    rep.details["min_mu"] = min(float(w.min()) for w in mu.values())
    rep.details["min_xi"] = min(float(r.min()) for r in xi.values())
    return rep


def verify_subtheory_noncontextual_model(tol=None) -> Report:
    """Run every model check on the stabilizer fragment with the Wigner model."""
    tol = cfg.check_tol() if tol is None else tol
    theory = stabilizer_fragment()
    rep = Report("qutrit stabilizer fragment admits a noncontextual model",
                 scope="unsharp members: the six pairwise equal mixtures of Pauli PVMs; "
                       "quantifiers range over the 13 listed preparations and 10 measurements")
    rep.details["preparations"] = len(theory.preparations)
    rep.details["measurements"] = len(theory.measurements)
    nonneg = rep.add(nonnegativity(theory, tol))
    if not nonneg.passed:
        return rep
    model = wigner_model(theory)
    rep.add(empirical_adequacy(model, theory, tol))
    rep.add(check_measurement_noncontextual(model, theory, tol, tol))
    rep.add(check_preparation_noncontextual(model, theory, tol, tol))
    rep.add(verify_determinism_iff_sharp(model, theory, tol))
    rep.add(verify_P1(theory, tol))
    rep.add(_mixture_procedures_check(theory, model, tol))
    return rep


def _mixture_procedures_check(theory, model, tol) -> Report:
    """Uniform mixtures of each Pauli eigenbasis, as four distinct procedures.

    Each procedure's epistemic state is the average of its components'
    Wigner functions; all four are operationally equivalent to I/3, so this
    exercises preparation noncontextuality on a nontrivial class.
    """
    names = list(pauli_bases())
    epi = dict(model.epistemic)
    table = [list(t) for t in theory.table]
    preps = list(theory.preparations)
    for name in names:
        comps = [theory.prep_index(f"{name}{k}") for k in range(D)]
        label = f"uniform({name})"
        preps.append(label)
        epi[label] = np.mean([model.epistemic[theory.preparations[c]] for c in comps], axis=0)
        for mi, t in enumerate(theory.table):
            table[mi].append(t[comps].mean(axis=0))
    mixed = OperationalTheory(tuple(preps), theory.measurements, tuple(np.array(t) for t in table),
                              theory.sharp, theory.outcome_labels)
    rep = check_preparation_noncontextual(OntologicalModel(model.ontic_states, epi, model.responses),
                                          mixed, tol, tol)
    rep.name = "preparation noncontextuality across basis-mixture procedures"
    return rep


def magic_boundary(tol=cfg.TOL_SUM) -> Report:
    """Adding the strange state to the fragment breaks nonnegativity."""
    theory = stabilizer_fragment({"strange": strange_state()})
    inner = nonnegativity(theory, tol)
    rep = Report("magic-state preparation has a negative Wigner value")
    rep.details["violations"] = inner.violations
    rep.details["min_mu"] = inner.details["min_mu"]
    if not any(v.get("preparation") == "strange" for v in inner.violations):
        rep.violations.append({"reason": "strange state Wigner function is nonnegative"})
    return rep
