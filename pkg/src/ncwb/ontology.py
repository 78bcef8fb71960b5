"""Finite ontological models and the checks that make them noncontextual.

A model lists ontic states, an epistemic distribution per preparation and
response functions per measurement (``responses[M][k, lam]``). The checks
here are all relative to the preparations and measurements actually listed
in the operational theory; reports say so in their ``scope`` field.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _config as cfg
from .errors import InvalidModel, LabelMismatch
from .measurements import OperationalTheory, fair_coin_povm, build_quantum_theory
from .report import Report

SCOPE = "quantifiers range over the listed preparations and measurements only"


def _mix(xi, mu) -> np.ndarray:
    """``sum_lam xi[k, lam] mu[lam]`` with a fixed summation order.

    Base and extended models share this so their predictions agree bit for bit.
    """
    return np.sum(np.ascontiguousarray(xi, dtype=float) * mu, axis=1)


@dataclass(frozen=True, eq=False)
class OntologicalModel:
    ontic_states: tuple
    epistemic: Mapping[str, np.ndarray]
    responses: Mapping[str, np.ndarray]
    tol: float = field(default=cfg.TOL_SUM, repr=False)

    def __post_init__(self):
        states = tuple(self.ontic_states)
        n = len(states)
        if n == 0 or len(set(states)) != n:
            raise InvalidModel("ontic state labels must be non-empty and unique")
        epi = {}
        for p, mu in self.epistemic.items():
            mu = np.array(mu, dtype=float)
            if mu.shape != (n,):
                raise InvalidModel(f"epistemic[{p!r}] has shape {mu.shape}, expected ({n},)")
            if np.any(mu < -self.tol) or abs(mu.sum() - 1) > self.tol:
                raise InvalidModel(f"epistemic[{p!r}] is not a distribution (sum {mu.sum():.12g})")
            mu.setflags(write=False)
            epi[p] = mu
        resp = {}
        for m, xi in self.responses.items():
            xi = np.array(xi, dtype=float, order="C")
            if xi.ndim != 2 or xi.shape[1] != n:
                raise InvalidModel(f"responses[{m!r}] has shape {xi.shape}, expected (K, {n})")
            if np.any(xi < -self.tol) or np.any(xi > 1 + self.tol):
                raise InvalidModel(f"responses[{m!r}] leaves [0, 1]")
            sums = xi.sum(axis=0)
            bad = np.flatnonzero(np.abs(sums - 1) > self.tol)
            if len(bad):
                lam = states[bad[0]]
                raise InvalidModel(f"responses[{m!r}] at ontic state {lam!r} sum to {sums[bad[0]]:.12g}")
            xi.setflags(write=False)
            resp[m] = xi
        object.__setattr__(self, "ontic_states", states)
        object.__setattr__(self, "epistemic", epi)
        object.__setattr__(self, "responses", resp)

    def predict(self, preparation, measurement) -> np.ndarray:
        return _mix(self.responses[measurement], self.epistemic[preparation])


def _require_labels(model, theory):
    missing_p = [p for p in theory.preparations if p not in model.epistemic]
    missing_m = [m for m in theory.measurements if m not in model.responses]
    if missing_p or missing_m:
        raise LabelMismatch(f"model lacks preparations {missing_p} / measurements {missing_m}")
    for mi, m in enumerate(theory.measurements):
        if model.responses[m].shape[0] != theory.table[mi].shape[1]:
            raise LabelMismatch(f"outcome count of {m!r} differs between model and theory")


def adequacy_residues(model: OntologicalModel, theory: OperationalTheory) -> dict:
    """``sum_lam mu(lam|P) xi(k|lam,M) - p(k|M,P)`` as arrays ``[M] -> (n_prep, K)``."""
    _require_labels(model, theory)
    out = {}
    for mi, m in enumerate(theory.measurements):
        pred = np.array([model.predict(p, m) for p in theory.preparations])
        out[m] = pred - theory.table[mi]
    return out


def empirical_adequacy(model: OntologicalModel, theory: OperationalTheory, tol=None) -> Report:
    tol = cfg.check_tol() if tol is None else tol
    rep = Report("empirical adequacy", scope=SCOPE)
    worst = 0.0
    for mi, (m, res) in enumerate(adequacy_residues(model, theory).items()):
        worst = max(worst, float(np.max(np.abs(res))))
        for pi, k in zip(*np.nonzero(np.abs(res) > tol)):
            rep.violations.append({"preparation": theory.preparations[pi], "measurement": m,
                                   "outcome": theory.outcome_labels[mi][k],
                                   "residue": float(res[pi, k])})
    rep.details["max_residue"] = worst
    return rep


def is_outcome_deterministic(model: OntologicalModel, measurement, tol=cfg.TOL_SUM) -> bool:
    if measurement not in model.responses:
        raise LabelMismatch(f"unknown measurement {measurement!r}")
    xi = model.responses[measurement]
    return bool(np.all(np.minimum(np.abs(xi), np.abs(xi - 1)) <= tol))


def _classes(n, same):
    """Connected components of the pairwise-agreement graph (union-find)."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if same(i, j)]
    if not pairs:
        return [[i] for i in range(n)]
    r, c = zip(*pairs)
    graph = coo_matrix((np.ones(len(pairs)), (r, c)), shape=(n, n))
    _, lab = connected_components(graph, directed=False)
    groups = {}
    for i, g in enumerate(lab):
        groups.setdefault(g, []).append(i)
    return sorted(groups.values())


def _matching_permutation(a, b, tol, allow_perm):
    """Outcome relabelling under which table block ``b`` equals ``a``, or None."""
    if a.shape != b.shape:
        return None
    ident = tuple(range(a.shape[1]))
    if np.max(np.abs(a - b), initial=0.0) <= tol:
        return ident
    if not allow_perm:
        return None
    for perm in itertools.permutations(ident):
        if np.max(np.abs(a - b[:, perm]), initial=0.0) <= tol:
            return perm
    return None


def measurement_classes(theory: OperationalTheory, tol=None, allow_perm=False) -> list[list[int]]:
    """Operational-equivalence classes of measurements (indices)."""
    tol = cfg.check_tol() if tol is None else tol
    t = theory.table
    return _classes(len(t), lambda i, j: _matching_permutation(t[i], t[j], tol, allow_perm) is not None)


def check_measurement_noncontextual(model: OntologicalModel, theory: OperationalTheory,
                                    tol_stats=None, tol_xi=None, allow_perm=False) -> Report:
    """Operationally equivalent measurements must get the same response functions.

    Equivalence compares table blocks outcome-by-outcome under the identity
    labelling; ``allow_perm`` also accepts a relabelling of outcomes and then
    compares responses under that relabelling.
    """
    tol_stats = cfg.check_tol() if tol_stats is None else tol_stats
    tol_xi = cfg.check_tol() if tol_xi is None else tol_xi
    _require_labels(model, theory)
    rep = Report("measurement noncontextuality", scope=SCOPE)
    classes = measurement_classes(theory, tol_stats, allow_perm)
    rep.details["classes"] = [[theory.measurements[i] for i in c] for c in classes]
    for cls in classes:
        for a, b in itertools.combinations(cls, 2):
            ta, tb = theory.table[a], theory.table[b]
            perm = _matching_permutation(ta, tb, tol_stats, allow_perm)
            if perm is None:
                # same class only through a chain; compare directly under identity
                perm = tuple(range(ta.shape[1]))
            ma, mb = theory.measurements[a], theory.measurements[b]
            gap = np.abs(model.responses[ma] - model.responses[mb][list(perm)])
            if np.max(gap) > tol_xi:
                k, lam = np.unravel_index(np.argmax(gap), gap.shape)
                rep.violations.append({"measurements": [ma, mb], "outcome": int(k),
                                       "ontic_state": model.ontic_states[lam],
                                       "gap": float(gap[k, lam])})
    return rep


def preparation_classes(theory: OperationalTheory, tol=None) -> list[list[int]]:
    tol = cfg.check_tol() if tol is None else tol
    sig = [theory.prep_signature(i) for i in range(len(theory.preparations))]
    return _classes(len(sig), lambda i, j: np.max(np.abs(sig[i] - sig[j]), initial=0.0) <= tol)


def check_preparation_noncontextual(model: OntologicalModel, theory: OperationalTheory,
                                    tol_stats=None, tol_mu=None) -> Report:
    """Operationally equivalent preparations must get the same epistemic state."""
    tol_stats = cfg.check_tol() if tol_stats is None else tol_stats
    tol_mu = cfg.check_tol() if tol_mu is None else tol_mu
    _require_labels(model, theory)
    rep = Report("preparation noncontextuality", scope=SCOPE)
    classes = preparation_classes(theory, tol_stats)
    rep.details["classes"] = [[theory.preparations[i] for i in c] for c in classes]
    for cls in classes:
        for a, b in itertools.combinations(cls, 2):
            pa, pb = theory.preparations[a], theory.preparations[b]
            gap = np.abs(model.epistemic[pa] - model.epistemic[pb])
            if np.max(gap) > tol_mu:
                lam = int(np.argmax(gap))
                rep.violations.append({"preparations": [pa, pb],
                                       "ontic_state": model.ontic_states[lam],
                                       "gap": float(gap[lam])})
    return rep


def verify_determinism_iff_sharp(model: OntologicalModel, theory: OperationalTheory,
                                 tol=cfg.TOL_SUM) -> Report:
    """Outcome determinism must coincide with sharpness for every listed measurement."""
    _require_labels(model, theory)
    rep = Report("outcome determinism iff sharp", scope=SCOPE)
    for m, sharp in zip(theory.measurements, theory.sharp):
        det = is_outcome_deterministic(model, m, tol)
        rep.details[m] = {"sharp": sharp, "deterministic": det}
        if sharp and not det:
            rep.violations.append({"direction": "a", "measurement": m,
                                   "reason": "sharp but outcome-indeterministic"})
        elif det and not sharp:
            rep.violations.append({"direction": "b", "measurement": m,
                                   "reason": "unsharp but outcome-deterministic"})
    return rep


@dataclass(frozen=True, eq=False)
class IntervalResponse:
    """Cut points ``0 = w_0 <= w_1 <= ... <= w_K`` per base ontic state.

    Outcome ``k`` (0-based) fires for ancilla values in
    ``[cuts[lam][k], cuts[lam][k+1])``; the last interval is closed and
    extends to 1. Cut points are exact rationals built from the float
    response values, so interval lengths reproduce them exactly.
    """

    cuts: tuple  # per base ontic state: tuple of Fractions, length K + 1

    @property
    def n_outcomes(self):
        return len(self.cuts[0]) - 1

    def indicator(self, k, lam, a) -> int:
        c = self.cuts[lam]
        a = Fraction(a)
        last = k == len(c) - 2
        if last:
            return int(c[k] <= a)
        return int(c[k] <= a < c[k + 1])

    def lengths(self) -> np.ndarray:
        """Interval lengths as floats, shape ``(K, n_base_states)``."""
        return np.array([[float(c[k + 1] - c[k]) for c in self.cuts]
                         for k in range(self.n_outcomes)])

    def permuted(self, perm) -> "PermutedIntervalResponse":
        return PermutedIntervalResponse(self, tuple(perm))


@dataclass(frozen=True, eq=False)
class PermutedIntervalResponse:
    """Outcome ``k`` fires where outcome ``perm[k]`` of ``base`` fires."""

    base: IntervalResponse
    perm: tuple

    @property
    def n_outcomes(self):
        return self.base.n_outcomes

    def indicator(self, k, lam, a) -> int:
        return self.base.indicator(self.perm[k], lam, a)

    def lengths(self) -> np.ndarray:
        return self.base.lengths()[list(self.perm)]

    def cut_points(self, lam):
        return self.base.cuts[lam]


def interval_response(xi) -> IntervalResponse:
    xi = np.asarray(xi, dtype=float)
    cuts = []
    for lam in range(xi.shape[1]):
        acc = [Fraction(0)]
        for k in range(xi.shape[0]):
            acc.append(acc[-1] + Fraction(float(xi[k, lam])))
        if abs(float(acc[-1]) - 1) > cfg.TOL_SUM:
            raise InvalidModel(f"responses at base state {lam} sum to {float(acc[-1])}")
        cuts.append(tuple(acc))
    return IntervalResponse(tuple(cuts))


@dataclass(frozen=True, eq=False)
class ExtendedModel:
    """Base model times a uniform ancilla on [0, 1] with indicator responses."""

    base: OntologicalModel
    responses: Mapping[str, object]

    @property
    def ontic_states(self):
        return self.base.ontic_states

    def response(self, measurement, k, lam, a) -> int:
        return self.responses[measurement].indicator(k, lam, a)

    def marginal_response(self, measurement) -> np.ndarray:
        """Response integrated over the ancilla: exactly the interval lengths."""
        return self.responses[measurement].lengths()

    def predict(self, preparation, measurement) -> np.ndarray:
        return _mix(self.marginal_response(measurement), self.base.epistemic[preparation])

    def with_relabelled(self, measurement, perm, new_label) -> "ExtendedModel":
        """Add ``new_label``: ``measurement`` followed by the outcome map ``k -> perm[k]``."""
        resp = dict(self.responses)
        resp[new_label] = resp[measurement].permuted(perm)
        base_resp = dict(self.base.responses)
        base_resp[new_label] = self.base.responses[measurement][list(perm)]
        base = OntologicalModel(self.base.ontic_states, self.base.epistemic, base_resp)
        return ExtendedModel(base, resp)

    def _all_cuts(self, lam):
        pts = {Fraction(0), Fraction(1)}
        for r in self.responses.values():
            base = r.base if isinstance(r, PermutedIntervalResponse) else r
            pts.update(c for c in base.cuts[lam] if 0 <= c <= 1)
        return sorted(pts)

    def to_finite_model(self) -> OntologicalModel:
        """Exact finite model on ``(lam_s, ancilla cell)`` pairs.

        Each ancilla cell lies between consecutive cut points of all
        extended measurements, so every indicator is constant on it.
        """
        states, cells = [], []
        for lam, name in enumerate(self.base.ontic_states):
            pts = self._all_cuts(lam)
            for lo, hi in zip(pts, pts[1:]):
                if hi > lo:
                    states.append(f"{name}|[{lo},{hi}]")
                    cells.append((lam, lo, hi))
        epi = {p: np.array([mu[lam] * float(hi - lo) for lam, lo, hi in cells])
               for p, mu in self.base.epistemic.items()}
        resp = {m: np.array([[r.indicator(k, lam, lo) for lam, lo, _ in cells]
                             for k in range(r.n_outcomes)], dtype=float)
                for m, r in self.responses.items()}
        return OntologicalModel(tuple(states), epi, resp)


def ontic_extend(model: OntologicalModel, measurements=None) -> ExtendedModel:
    """Outcome-deterministic extension of the given measurements (default: all)."""
    if measurements is None:
        measurements = list(model.responses)
    elif isinstance(measurements, str):
        measurements = [measurements]
    missing = [m for m in measurements if m not in model.responses]
    if missing:
        raise LabelMismatch(f"unknown measurements {missing}")
    return ExtendedModel(model, {m: interval_response(model.responses[m]) for m in measurements})


def extended_adequacy_residues(ext: ExtendedModel, theory: OperationalTheory) -> dict:
    out = {}
    for mi, m in enumerate(theory.measurements):
        if m not in ext.responses:
            continue
        pred = np.array([ext.predict(p, m) for p in theory.preparations])
        out[m] = pred - theory.table[mi]
    return out


def extended_adequacy(ext: ExtendedModel, theory: OperationalTheory, tol=None) -> Report:
    tol = cfg.check_tol() if tol is None else tol
    rep = Report("extended-model adequacy", scope=SCOPE)
    for m, res in extended_adequacy_residues(ext, theory).items():
        for pi, k in zip(*np.nonzero(np.abs(res) > tol)):
            rep.violations.append({"preparation": theory.preparations[pi], "measurement": m,
                                   "outcome": int(k), "residue": float(res[pi, k])})
    return rep


def disagreement_measure(ext: ExtendedModel, m1, m2, k, lam) -> Fraction:
    """Lebesgue measure of ancilla values where outcome ``k`` of ``m1`` and ``m2`` differ."""
    pts = ext._all_cuts(lam)
    total = Fraction(0)
    for lo, hi in zip(pts, pts[1:]):
        if ext.response(m1, k, lam, lo) != ext.response(m2, k, lam, lo):
            total += hi - lo
    return total


def fair_coin_model(labels=("M",), preparations=("P",)) -> OntologicalModel:
    """One ontic state; every listed measurement answers 1/2, 1/2."""
    return OntologicalModel(("lambda",), {p: [1.0] for p in preparations},
                            {m: [[0.5], [0.5]] for m in labels})


def fair_coin_theory(labels=("M",)) -> OperationalTheory:
    coin = fair_coin_povm()
    return build_quantum_theory([np.eye(2) / 2], [coin] * len(labels),
                                prep_labels=["P"], meas_labels=list(labels))


def bit_flip_extension_demo() -> Report:
    """Same system-level responses, different extended responses for a bit-flipped coin.

    ``M`` is the fair coin; ``M'`` runs ``M`` and flips the outcome. Both
    realize ``{I/2, I/2}``, so at the system level both answer (1/2, 1/2).
    Extending ``M`` and defining ``M'`` as its relabelling on the extension
    gives indicator responses that disagree on the whole ancilla interval
    (up to a point).
    """
    theory = fair_coin_theory(("M", "M'"))
    model = fair_coin_model(("M", "M'"))
    rep = Report("bit-flipped fair coin: equal on the system, unequal on the extension")

    sys_eq = rep.add(Report("system-level response sets equal"))
    gap = float(np.max(np.abs(model.responses["M"] - model.responses["M'"])))
    sys_eq.details = {"M": model.responses["M"][:, 0], "M'": model.responses["M'"][:, 0]}
    if gap != 0.0:
        sys_eq.violations.append({"gap": gap})

    ext = ontic_extend(model, "M").with_relabelled("M", (1, 0), "M'")
    extended = ontic_extend(model, "M")
    neq = rep.add(Report("extended responses differ on a full-measure ancilla set"))
    for k in range(2):
        meas = disagreement_measure(ext, "M", "M'", k, 0)
        neq.details[f"outcome {k} disagreement measure"] = meas
        if meas != 1:
            neq.violations.append({"outcome": k, "measure": meas})
    neq.details["M intervals"] = [[float(c) for c in extended.responses["M"].cuts[0]]]
    for k in range(2):
        if not all(ext.response(m, k, 0, a) in (0, 1) for m in ("M", "M'")
                   for a in (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1)):
            neq.violations.append({"outcome": k, "reason": "non-indicator response"})

    ad = rep.add(extended_adequacy(ext, theory))
    ad.name = "extended adequacy of M and M'"
    # the discretized extension is an ordinary finite model, so the
    # generic check must flag it
    finite = ext.to_finite_model()
    nc = check_measurement_noncontextual(finite, theory)
    flagged = rep.add(Report("discretized extension fails measurement noncontextuality"))
    flagged.details = {"ontic_states": finite.ontic_states, "violations": nc.violations}
    if nc.passed:
        flagged.violations.append({"reason": "no response mismatch detected"})
    return rep
