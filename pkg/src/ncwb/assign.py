"""Deterministic and spectral value assignments over finite effect sets.

An :class:`AssignmentProblem` lists distinct effects (one assignment
variable per effect, which is what measurement noncontextuality demands)
and the linear relations among them that a particular argument uses:

``povm``   the indexed effects sum to the identity (repeats allowed),
           so their values must sum to 1;
``sum``    ``E_t = sum_i c_i E_i`` for ``indices = [t, i1, i2, ...]``,
           so ``w_t = sum_i c_i w_i``;
``scale``  ``E_t = c E_i``, a one-term ``sum``.

Relations are never discovered automatically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _config as cfg
from . import _kernels
from .errors import (DimensionMismatch, InvalidProblem, InvalidValuation, NotProjective,
                     TooLarge)
from .operators import as_effect, eigenvalues, is_projector, spectral_decompose
from .report import Report

MAX_DETERMINISTIC = 24
MAX_SPECTRAL = 10**6
RELATION_KINDS = ("povm", "sum", "scale")


@dataclass(frozen=True)
class Relation:
    kind: str
    indices: tuple
    coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise InvalidProblem(f"unknown relation kind {self.kind!r}")
        idx = tuple(int(i) for i in self.indices)
        coeffs = tuple(float(c) for c in self.coeffs)
        if self.kind == "povm":
            if not idx:
                raise InvalidProblem("empty POVM relation")
            coeffs = ()
        else:
            if len(idx) < 2:
                raise InvalidProblem(f"{self.kind} relation needs a target and at least one term")
            if self.kind == "scale" and len(idx) != 2:
                raise InvalidProblem("scale relation takes exactly [target, source]")
            if not coeffs:
                coeffs = (1.0,) * (len(idx) - 1)
            if len(coeffs) != len(idx) - 1:
                raise InvalidProblem("one coefficient per term")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", coeffs)

    def terms(self):
        """``(effect, coefficient)`` pairs of the homogeneous form ``sum c_i w_i = rhs``."""
        if self.kind == "povm":
            return [(i, 1.0) for i in self.indices], 1.0
        t, rest = self.indices[0], self.indices[1:]
        return [(t, 1.0)] + [(i, -c) for i, c in zip(rest, self.coeffs)], 0.0

    def to_dict(self):
        d = {"kind": self.kind, "indices": list(self.indices)}
        if self.coeffs:
            d["coeffs"] = list(self.coeffs)
        return d


@dataclass(frozen=True, eq=False)
class AssignmentProblem:
    """Distinct effects plus the relations an argument registers among them."""

    effects: np.ndarray
    relations: tuple
    mode: str = "deterministic"
    refined: bool = False
    tol_dedup: float = field(default=cfg.TOL_DEDUP, repr=False)
    tol_sum: float = field(default=cfg.TOL_SUM, repr=False)

    def __post_init__(self):
        effects = np.asarray(self.effects, dtype=complex)
        if effects.ndim != 3:
            if effects.size == 0:
                effects = effects.reshape(0, 1, 1)
            else:
                raise DimensionMismatch(f"effects must have shape (n, d, d), got {effects.shape}")
        effects = np.array([as_effect(e) for e in effects]).reshape(effects.shape)
        if self.mode not in ("deterministic", "spectral"):
            raise InvalidProblem(f"mode must be 'deterministic' or 'spectral', not {self.mode!r}")
        n = len(effects)
        for i in range(n):
            for j in range(i + 1, n):
                if np.max(np.abs(effects[i] - effects[j])) <= self.tol_dedup:
                    raise InvalidProblem(f"effects {i} and {j} coincide; deduplicate them")
        rels = tuple(r if isinstance(r, Relation) else Relation(**r) for r in self.relations)
        d = effects.shape[1] if n else 0
        for ri, r in enumerate(rels):
            if any(i < 0 or i >= n for i in r.indices):
                raise InvalidProblem(f"relation {ri} indexes outside 0..{n - 1}")
            if r.kind == "povm":
                err = np.max(np.abs(effects[list(r.indices)].sum(axis=0) - np.eye(d)))
            else:
                t, rest = r.indices[0], r.indices[1:]
                rhs = sum(c * effects[i] for i, c in zip(rest, r.coeffs))
                err = np.max(np.abs(effects[t] - rhs))
            if err > self.tol_sum:
                raise InvalidProblem(f"relation {ri} ({r.kind}) fails at the operator level by {err:.3e}")
        effects.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "relations", rels)

    @property
    def dim(self):
        return self.effects.shape[1] if len(self.effects) else 0

    def __len__(self):
        return len(self.effects)

    def with_mode(self, mode=None, refined=None) -> "AssignmentProblem":
        return AssignmentProblem(self.effects, self.relations,
                                 self.mode if mode is None else mode,
                                 self.refined if refined is None else refined)

    def identity_index(self):
        d = self.dim
        for i, e in enumerate(self.effects):
            if np.max(np.abs(e - np.eye(d))) <= self.tol_dedup:
                return i
        return None

    def to_dict(self):
        return {"effects": self.effects, "relations": [r.to_dict() for r in self.relations],
                "mode": self.mode, "refined": self.refined}


class ProblemBuilder:
    """Accumulate effects with deduplication and register relations by matrix."""

    def __init__(self, tol_dedup=cfg.TOL_DEDUP):
        self.tol_dedup = tol_dedup
        self.effects: list[np.ndarray] = []
        self.relations: list[Relation] = []

    def effect(self, e) -> int:
        e = as_effect(e)
        for i, f in enumerate(self.effects):
            if f.shape == e.shape and np.max(np.abs(f - e)) <= self.tol_dedup:
                return i
        self.effects.append(e)
        return len(self.effects) - 1

    def povm(self, effects) -> list[int]:
        idx = [self.effect(e) for e in effects]
        self.relations.append(Relation("povm", idx))
        return idx

    def sum(self, target, terms, coeffs=None) -> int:
        idx = [self.effect(target)] + [self.effect(t) for t in terms]
        self.relations.append(Relation("sum", idx, coeffs or ()))
        return idx[0]

    def scale(self, target, source, c) -> int:
        idx = [self.effect(target), self.effect(source)]
        self.relations.append(Relation("scale", idx, (c,)))
        return idx[0]

    def build(self, mode="deterministic", refined=False) -> AssignmentProblem:
        return AssignmentProblem(np.array(self.effects), tuple(self.relations), mode, refined)


@dataclass(frozen=True)
class Assignment:
    """Values per effect index.

    In refined mode an effect that occurs more than once in a single
    relation (and nowhere else) gets one value per occurrence; those are
    stored in ``occurrences`` keyed by ``(relation, slot)`` instead.
    """

    values: Mapping[int, float]
    occurrences: Mapping[tuple, float] = field(default_factory=dict)

    def __getitem__(self, i):
        return self.values[i]

    def as_vector(self, n):
        return np.array([self.values.get(i, np.nan) for i in range(n)])

    def to_dict(self):
        d = {"values": {str(k): v for k, v in sorted(self.values.items())}}
        if self.occurrences:
            d["occurrences"] = {f"{r}.{s}": v for (r, s), v in sorted(self.occurrences.items())}
        return d


def _variables(p: AssignmentProblem):
    """Map each relation slot to an assignment variable.

    Default: one variable per effect. Refined: occurrences of one effect in
    *different* relations are identified; repeated occurrences inside one
    relation stay independent unless linked through another relation.
    Returns ``(slot_var, effect_var, n_vars, var_effect)`` where
    ``effect_var[e]`` is ``None`` when ``e`` is split over several variables.
    """
    n = len(p)
    if not p.refined:
        slot_var = {(ri, s): i for ri, r in enumerate(p.relations) for s, i in enumerate(r.indices)}
        return slot_var, list(range(n)), n, list(range(n))
    slots = [(ri, s, e) for ri, r in enumerate(p.relations) for s, e in enumerate(r.indices)]
    parent = list(range(len(slots)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(len(slots)):
        for b in range(a + 1, len(slots)):
            if slots[a][2] == slots[b][2] and slots[a][0] != slots[b][0]:
                parent[find(a)] = find(b)
    var_of_root, slot_var, var_effect = {}, {}, []
    effect_roots = {e: set() for e in range(n)}
    for a, (ri, s, e) in enumerate(slots):
        root = find(a)
        if root not in var_of_root:
            var_of_root[root] = len(var_effect)
            var_effect.append(e)
        slot_var[(ri, s)] = var_of_root[root]
        effect_roots[e].add(var_of_root[root])
    effect_var = []
    for e in range(n):
        vs = effect_roots[e]
        if not vs:
            effect_var.append(len(var_effect))
            var_effect.append(e)
        elif len(vs) == 1:
            effect_var.append(next(iter(vs)))
        else:
            effect_var.append(None)
    return slot_var, effect_var, len(var_effect), var_effect


def _constraint_rows(p, slot_var, n_vars):
    a = np.zeros((len(p.relations), n_vars))
    b = np.zeros(len(p.relations))
    for ri, r in enumerate(p.relations):
        terms, rhs = r.terms()
        for s, (_, c) in enumerate(terms):
            a[ri, slot_var[(ri, s)]] += c
        b[ri] = rhs
    return a, b


def _enumerate(p: AssignmentProblem, candidate_values, backend=None, tol=None):
    tol = p.tol_sum if tol is None else tol
    slot_var, effect_var, n_vars, var_effect = _variables(p)
    cands = [candidate_values[e] for e in var_effect]
    radix = np.array([len(c) for c in cands], dtype=np.int64)
    width = int(radix.max()) if n_vars else 1
    values = np.zeros((n_vars, width))
    for v, c in enumerate(cands):
        values[v, :len(c)] = c
    a, b = _constraint_rows(p, slot_var, n_vars)
    digits = _kernels.search(values, radix, a, b, tol, backend)
    out = []
    for row in digits:
        x = values[np.arange(n_vars), row]
        vals = {e: float(x[v]) for e, v in enumerate(effect_var) if v is not None}
        occ = {}
        if p.refined:
            for e, v in enumerate(effect_var):
                if v is None:
                    occ.update({k: float(x[sv]) for k, sv in slot_var.items()
                                if p.relations[k[0]].indices[k[1]] == e})
        out.append(Assignment(vals, occ))
    return out


def _n_vars(p):
    return _variables(p)[2]


def enumerate_deterministic_assignments(p: AssignmentProblem, backend=None) -> list[Assignment]:
    """All 0/1 valuations satisfying every registered relation.

    With only POVM relations this is exactly "one effect per POVM gets 1".
    An empty list certifies that no outcome-deterministic noncontextual
    valuation exists for the registered structure.
    """
    n = _n_vars(p)
    if n > MAX_DETERMINISTIC:
        raise TooLarge(f"{n} variables exceed the exhaustive bound {MAX_DETERMINISTIC}")
    return _enumerate(p, [np.array([0.0, 1.0])] * len(p), backend)


def merged_spectrum(e, tol_degen=cfg.TOL_DEGEN) -> np.ndarray:
    """Distinct eigenvalues, with values within ``tol_degen`` of 0 or 1 snapped."""
    s = np.array(spectral_decompose(e, tol_degen).eigenvalues, dtype=float)
    s[np.abs(s) < tol_degen] = 0.0
    s[np.abs(s - 1) < tol_degen] = 1.0
    return s


def enumerate_spectral_assignments(p: AssignmentProblem, backend=None) -> list[Assignment]:
    """All assignments with each value in its effect's spectrum and every relation satisfied."""
    spectra = [merged_spectrum(e) for e in p.effects]
    _, _, _, var_effect = _variables(p)
    size = math.prod(len(spectra[e]) for e in var_effect)
    if size > MAX_SPECTRAL:
        raise TooLarge(f"spectral product space has {size} candidates (bound {MAX_SPECTRAL})")
    return _enumerate(p, spectra, backend)


def enumerate_assignments(p: AssignmentProblem, backend=None) -> list[Assignment]:
    if p.mode == "spectral":
        return enumerate_spectral_assignments(p, backend)
    return enumerate_deterministic_assignments(p, backend)


def relation_residues(p: AssignmentProblem, v: Assignment) -> list[float]:
    """``|sum c_i w_i - rhs|`` per relation, computed directly from the values."""
    out = []
    for ri, r in enumerate(p.relations):
        terms, rhs = r.terms()
        total = 0.0
        for s, (e, c) in enumerate(terms):
            val = v.values[e] if e in v.values else v.occurrences[(ri, s)]
            total += c * val
        out.append(abs(total - rhs))
    return out


def _is01(x, tol):
    return abs(x) <= tol or abs(x - 1) <= tol


def check_ks_rules(v: Assignment, p: AssignmentProblem, tol=cfg.TOL_SUM) -> Report:
    """Check the traditional 0/1 valuation rules on a projector-only problem.

    KS1: every value is 0 or 1. KS2: additivity on registered projector
    sums, and on POVM relations (orthogonal projectors summing to I, so
    exactly one 1). KS3: ``v(I) = 1`` when the identity is registered.
    """
    for i, e in enumerate(p.effects):
        if not is_projector(e):
            raise NotProjective(f"effect {i} is not a projector")
    rep = Report("KS1-KS3 valuation rules")
    for i, x in sorted(v.values.items()):
        if not _is01(x, tol):
            rep.violations.append({"rule": "KS1", "effect": i, "value": x})
    for ri, r in enumerate(p.relations):
        terms, rhs = r.terms()
        res = abs(sum(c * v.values[e] for e, c in terms) - rhs)
        if res > tol:
            rule = "KS2/KS3" if r.kind == "povm" else "KS2"
            rep.violations.append({"rule": rule, "relation": ri, "residue": res})
    ident = p.identity_index()
    if ident is not None and abs(v.values[ident] - 1) > tol:
        rep.violations.append({"rule": "KS3", "effect": ident, "value": v.values[ident]})
    return rep


def check_nc_rules(w: Assignment, p: AssignmentProblem, tol=cfg.TOL_SUM) -> Report:
    """Rule-by-rule NC1-NC5 and NC1'/NC2' check of one probability assignment.

    NC5 is checked in its pointwise direction (projector implies a 0/1
    value). Its converse constrains a response function across ontic
    states, not a single valuation, and is checked by
    :func:`ncwb.ontology.verify_determinism_iff_sharp` instead.
    """
    rep = Report("NC1-NC5 / NC1'-NC2' probability rules")
    for i, x in sorted(w.values.items()):
        if x < -tol or x > 1 + tol:
            rep.violations.append({"rule": "NC1", "effect": i, "value": x})
        spec = merged_spectrum(p.effects[i])
        if np.min(np.abs(spec - x)) > cfg.TOL_DEGEN:
            rep.violations.append({"rule": "NC1'", "effect": i, "value": x})
        if is_projector(p.effects[i]) and not _is01(x, tol):
            rep.violations.append({"rule": "NC5", "effect": i, "value": x})
    for ri, (r, res) in enumerate(zip(p.relations, relation_residues(p, w))):
        if res > tol:
            rule = {"povm": "NC2+NC4", "sum": "NC2", "scale": "NC3"}[r.kind]
            if r.kind == "sum" and any(abs(c - 1) > 0 for c in r.coeffs):
                rule = "NC2'"
            rep.violations.append({"rule": rule, "relation": ri, "residue": res})
    ident = p.identity_index()
    if ident is not None and abs(w.values[ident] - 1) > tol:
        rep.violations.append({"rule": "NC4", "effect": ident, "value": w.values[ident]})
    return rep


def response_from_projector_valuation(effect, v) -> float:
    """``w(E) = sum_i s_i v(P_i)`` over the spectral projectors of ``effect``.

    ``v`` maps projector index (ascending-eigenvalue order of
    :func:`spectral_decompose`) to 0/1 and must select exactly one projector.
    """
    res = spectral_decompose(as_effect(effect))
    if isinstance(v, Mapping):
        vec = [v.get(i, 0) for i in range(len(res))]
        extra = set(v) - set(range(len(res)))
        if extra:
            raise InvalidValuation(f"no spectral projectors with indices {sorted(extra)}")
    else:
        vec = list(v)
        if len(vec) != len(res):
            raise InvalidValuation(f"expected {len(res)} projector values, got {len(vec)}")
    if any(x not in (0, 1) for x in vec) or sum(vec) != 1:
        raise InvalidValuation(f"valuation {vec} must assign 1 to exactly one projector")
    return float(np.dot(res.eigenvalues, vec))


def filter_effects_above_half(p: AssignmentProblem, tol=cfg.TOL_EIG) -> AssignmentProblem:
    """Subproblem on effects with smallest eigenvalue above one half.

    Relations survive only if every effect they mention survives.
    """
    keep = [i for i, e in enumerate(p.effects) if eigenvalues(e)[0] > 0.5 + tol]
    remap = {old: new for new, old in enumerate(keep)}
    rels = [Relation(r.kind, [remap[i] for i in r.indices], r.coeffs)
            for r in p.relations if all(i in remap for i in r.indices)]
    d = p.dim or 1
    effects = p.effects[keep] if keep else np.zeros((0, d, d), dtype=complex)
    return AssignmentProblem(effects, tuple(rels), p.mode, p.refined)


def hermitian_basis(d) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian matrices under ``tr(AB)``."""
    basis = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1
        basis.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1 / np.sqrt(2)
            basis.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[i, j], m[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(m)
    return np.array(basis)


@dataclass
class GleasonCertificate:
    """Result of representing an assignment as ``w(E) = tr(rho E)``.

    ``witness`` is ``None`` on success, ``"residual"`` when no Hermitian,
    unit-trace operator reproduces the values, and ``"psd"`` when the
    least-squares operator exists but has a negative eigenvalue. When the
    linear system is underdetermined (``determined`` false) a ``"psd"``
    witness only concerns the minimum-norm solution.
    """

    feasible: bool
    rho: np.ndarray | None
    residual: float
    min_eigenvalue: float
    witness: str | None
    rank: int
    determined: bool
    solution: np.ndarray = field(repr=False, default=None)

    @property
    def psd_violation(self) -> float:
        return max(0.0, -self.min_eigenvalue)

    @property
    def bloch_norm(self) -> float | None:
        """Length of the Bloch vector of the solved operator (qubits only)."""
        if self.solution is None or self.solution.shape != (2, 2):
            return None
        r = self.solution
        return float(np.sqrt((2 * r[0, 1].real) ** 2 + (2 * r[0, 1].imag) ** 2
                             + (r[0, 0] - r[1, 1]).real ** 2))

    def to_dict(self):
        return {"feasible": self.feasible, "rho": self.rho, "residual": self.residual,
                "min_eigenvalue": self.min_eigenvalue, "witness": self.witness,
                "rank": self.rank, "determined": self.determined,
                "bloch_norm": self.bloch_norm}


def gleason_feasibility(effects, w, tol=cfg.TOL_SUM, tol_psd=cfg.TOL_PSD) -> GleasonCertificate:
    """Is there a density operator with ``tr(rho E_i) = w_i`` for every listed effect?

    Least squares over the real coordinates of ``rho`` in an orthonormal
    Hermitian basis, with ``tr(rho) = 1`` appended as an extra equation.
    """
    effects = np.array([as_effect(e) for e in effects])
    d = effects.shape[1]
    if d > 8:
        raise DimensionMismatch(f"dimension {d} exceeds the supported bound 8")
    if isinstance(w, Assignment):
        w = w.as_vector(len(effects))
    w = np.asarray(w, dtype=float)
    if w.shape != (len(effects),) or np.any(np.isnan(w)):
        raise DimensionMismatch("need one value per effect")
    basis = hermitian_basis(d)
    rows = np.vstack([np.einsum("aij,kji->ka", basis, effects).real,
                      np.einsum("aii->a", basis).real[None, :]])
    rhs = np.concatenate([w, [1.0]])
    x, _, rank, _ = np.linalg.lstsq(rows, rhs, rcond=None)
    residual = float(np.linalg.norm(rows @ x - rhs))
    rho = np.einsum("a,aij->ij", x, basis)
    lo = float(np.linalg.eigvalsh(rho)[0])
    determined = int(rank) == d * d
    if residual > tol:
        return GleasonCertificate(False, None, residual, lo, "residual", int(rank), determined, rho)
    if lo < -tol_psd:
        return GleasonCertificate(False, None, residual, lo, "psd", int(rank), determined, rho)
    return GleasonCertificate(True, rho, residual, lo, None, int(rank), determined, rho)
