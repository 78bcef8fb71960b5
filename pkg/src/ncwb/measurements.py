"""POVM algebra and quantum operational theories.

Tensor-product convention: the system is always the left Kronecker factor,
so the system index varies slowest in a joint basis index
``s * ancilla_dim + a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, NamedTuple, Sequence

import numpy as np
from scipy.linalg import null_space, sqrtm

from . import _config as cfg
from .errors import (DimensionMismatch, InvalidPartition, InvalidPovm, LabelMismatch,
                     NotStochastic, NumericalFailure, WeightError)
from .operators import (as_density, as_hermitian, basis_projector, born, is_effect,
                        is_projector, partial_trace_second, pure, spectral_decompose)
from .report import Report


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered list of effects summing to the identity."""

    effects: np.ndarray
    labels: tuple = None
    tol: float = field(default=cfg.TOL_SUM, repr=False, compare=False)

    def __post_init__(self):
        effects = np.asarray(self.effects, dtype=complex)
        if effects.ndim != 3 or effects.shape[1] != effects.shape[2] or len(effects) == 0:
            raise InvalidPovm(f"effects must have shape (K, d, d), got {effects.shape}")
        effects = np.array([as_hermitian(e) for e in effects])
        for k, e in enumerate(effects):
            if not is_effect(e):
                raise InvalidPovm(f"element {k} is not an effect")
        d = effects.shape[1]
        err = np.max(np.abs(effects.sum(axis=0) - np.eye(d)))
        if err > self.tol:
            raise InvalidPovm(f"effects sum to identity only within {err:.3e}")
        labels = tuple(range(len(effects))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(effects) or len(set(labels)) != len(labels):
            raise InvalidPovm("labels must be distinct, one per effect")
        effects.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def __len__(self):
        return len(self.effects)

    def __getitem__(self, label):
        return self.effects[self.labels.index(label)]

    def is_sharp(self, tol=cfg.TOL_SUM) -> bool:
        return all(is_projector(e, tol) for e in self.effects)

    def probabilities(self, rho) -> np.ndarray:
        return np.array([born(rho, e) for e in self.effects])

    def allclose(self, other: "Povm", tol=cfg.TOL_SUM) -> bool:
        return (self.effects.shape == other.effects.shape
                and bool(np.max(np.abs(self.effects - other.effects)) <= tol))


def pvm_from_basis(vectors, labels=None) -> Povm:
    """Rank-one PVM from the columns-as-rows list ``vectors``."""
    return Povm(np.array([pure(v) for v in vectors]), labels)


def computational_pvm(dim) -> Povm:
    return Povm(np.array([basis_projector(i, dim) for i in range(dim)]))


def as_stochastic(s, tol=cfg.TOL_SUM) -> np.ndarray:
    """Validate a conditional distribution ``s[j, k] = s(j|k)``."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2:
        raise NotStochastic(f"stochastic map must be 2-D, got shape {s.shape}")
    if np.any(s < -tol) or np.any(s > 1 + tol):
        raise NotStochastic("entries must lie in [0, 1]")
    cols = s.sum(axis=0)
    if np.any(np.abs(cols - 1) > tol):
        raise NotStochastic(f"columns sum to {cols}")
    return s


def post_process(m: Povm, s, labels=None) -> Povm:
    """Effects ``E'_j = sum_k s(j|k) E_k`` of the post-processed measurement."""
    s = as_stochastic(s)
    if s.shape[1] != len(m):
        raise DimensionMismatch(f"map has {s.shape[1]} inputs, POVM has {len(m)} outcomes")
    return Povm(np.einsum("jk,kab->jab", s, m.effects), labels)


def coarse_grain(m: Povm, partition: Sequence[Sequence[Hashable]], labels=None) -> Povm:
    """Merge each block of outcome labels into a single outcome."""
    seen = [lab for block in partition for lab in block]
    if len(seen) != len(set(seen)) or set(seen) != set(m.labels) or any(not b for b in partition):
        raise InvalidPartition(f"{partition!r} is not a partition of {m.labels!r}")
    effects = np.array([sum(m[lab] for lab in block) for block in partition])
    if labels is None:
        labels = tuple("+".join(map(str, block)) for block in partition)
    return Povm(effects, labels)


def convex_mix(ms: Sequence[Povm], w, labels=None) -> Povm:
    """Outcome-wise mixture ``G_k = sum_a w_a E_k^(a)``."""
    w = np.asarray(w, dtype=float)
    if len(ms) != len(w) or len(ms) == 0:
        raise WeightError("need one weight per POVM")
    if np.any(w < -cfg.TOL_SUM) or abs(w.sum() - 1) > cfg.TOL_SUM:
        raise WeightError(f"weights {w} are not a probability vector")
    shapes = {m.effects.shape for m in ms}
    if len(shapes) != 1:
        raise DimensionMismatch(f"POVM shapes differ: {sorted(shapes)}")
    if len({m.labels for m in ms}) != 1:
        raise DimensionMismatch("POVMs must share one outcome label set")
    stack = np.array([m.effects for m in ms])
    return Povm(np.einsum("a,akij->kij", w, stack), labels or ms[0].labels)


def reduce(joint: Povm, rho_a, system_dim: int, drop_zero=False, labels=None) -> Povm:
    """Effective system POVM ``E_k = Tr_a((I_s (x) rho_a) P_k)``.

    Zero effects are kept unless ``drop_zero`` is set.
    """
    rho_a = as_density(rho_a)
    ancilla_dim = rho_a.shape[0]
    if joint.dim != system_dim * ancilla_dim:
        raise DimensionMismatch(f"joint dimension {joint.dim} != {system_dim} x {ancilla_dim}")
    lift = np.kron(np.eye(system_dim), rho_a)
    effects = [partial_trace_second(lift @ p, system_dim, ancilla_dim) for p in joint.effects]
    labels = joint.labels if labels is None else tuple(labels)
    if drop_zero:
        keep = [k for k, e in enumerate(effects) if np.max(np.abs(e)) >= cfg.TOL_SUM]
        effects = [effects[k] for k in keep]
        labels = tuple(labels[k] for k in keep)
    return Povm(np.array(effects), labels)


@dataclass(frozen=True, eq=False)
class NaimarkExtension:
    ancilla_state: np.ndarray
    joint_pvm: Povm
    system_dim: int
    ancilla_dim: int

    def __post_init__(self):
        if self.ancilla_state.shape != (self.ancilla_dim, self.ancilla_dim):
            raise DimensionMismatch("ancilla state does not match ancilla_dim")
        if not self.joint_pvm.is_sharp():
            raise InvalidPovm("joint measurement of a Naimark extension must be projective")

    def reduced(self, drop_zero=False) -> Povm:
        return reduce(self.joint_pvm, self.ancilla_state, self.system_dim, drop_zero)

    def extends(self, target: Povm, tol=cfg.TOL_SUM, drop_zero=False) -> bool:
        return self.reduced(drop_zero).allclose(target, tol)


def trine_vectors() -> list[np.ndarray]:
    """Three qubit kets 120 degrees apart on the X-Z great circle of the Bloch sphere."""
    return [np.array([np.cos(t / 2), np.sin(t / 2)], dtype=complex)
            for t in (0.0, 2 * np.pi / 3, 4 * np.pi / 3)]


def trine_projectors() -> np.ndarray:
    return np.array([pure(v) for v in trine_vectors()])


def trine_povm() -> Povm:
    return Povm(2 / 3 * trine_projectors())


def fair_coin_povm() -> Povm:
    return Povm(np.array([np.eye(2) / 2, np.eye(2) / 2]))


def fair_coin_naimark_pair() -> tuple[NaimarkExtension, NaimarkExtension]:
    """Two statistically distinct projective dilations of ``{I/2, I/2}``.

    The first couples the trine projectors to an ancilla in the maximally
    mixed qutrit state; the second measures the ancilla alone while it is
    prepared in an equal mixture of its first two basis states.
    """
    anc = [basis_projector(i, 3) for i in range(3)]
    trine = trine_projectors()
    pi_sa = sum(np.kron(trine[i], anc[i]) for i in range(3))
    ext1 = NaimarkExtension(
        ancilla_state=np.eye(3, dtype=complex) / 3,
        joint_pvm=Povm(np.array([pi_sa, np.eye(6) - pi_sa])),
        system_dim=2, ancilla_dim=3)
    ext2 = NaimarkExtension(
        ancilla_state=(anc[0] + anc[1]) / 2,
        joint_pvm=Povm(np.array([np.kron(np.eye(2), a) for a in anc])),
        system_dim=2, ancilla_dim=3)
    return ext1, ext2


def naimark_extend(m: Povm, tol=cfg.TOL_SUM) -> NaimarkExtension:
    """Isometric dilation with a ``len(m)``-level ancilla prepared in ``|0>``.

    The isometry ``V|psi> = sum_k sqrt(E_k)|psi> (x) |k>`` is completed to a
    unitary ``U`` and the joint PVM is ``U^dag (I (x) |k><k|) U``.
    """
    d, n = m.dim, len(m)
    roots = []
    for e in m.effects:
        r = sqrtm(e)
        roots.append((r + r.conj().T) / 2)
    v = np.zeros((d * n, d), dtype=complex)
    for k, r in enumerate(roots):
        v[k::n, :] = r
    u = np.zeros((d * n, d * n), dtype=complex)
    anchor = np.arange(d) * n
    u[:, anchor] = v
    rest = np.setdiff1d(np.arange(d * n), anchor)
    if len(rest):
        u[:, rest] = null_space(v.conj().T)
    if np.max(np.abs(u.conj().T @ u - np.eye(d * n))) > 1e-8:
        raise NumericalFailure("dilation failed to produce a unitary")
    pvm = []
    for k in range(n):
        proj = np.kron(np.eye(d), basis_projector(k, n))
        p = u.conj().T @ proj @ u
        pvm.append((p + p.conj().T) / 2)
    ext = NaimarkExtension(basis_projector(0, n).copy(), Povm(np.array(pvm), m.labels),
                           system_dim=d, ancilla_dim=n)
    err = np.max(np.abs(ext.reduced().effects - m.effects))
    if err > tol:
        raise NumericalFailure(f"dilation reproduces the POVM only within {err:.3e}")
    return ext


class SpectralRealization(NamedTuple):
    pvm: Povm
    stochastic: np.ndarray
    j0: int
    p2_witness: bool

    @property
    def eigenvalues(self):
        return self.stochastic[self.j0]


def spectral_realization(effect, tol=cfg.TOL_DEGEN) -> SpectralRealization:
    """Realize ``effect`` as outcome 0 of a noisy post-processing of its eigen-PVM.

    ``p2_witness`` is true iff some eigenvalue lies strictly inside ``(0, 1)``,
    i.e. the post-processing cannot be deterministic.
    """
    res = spectral_decompose(effect)
    s = np.clip(res.eigenvalues, 0.0, 1.0)
    stoch = np.vstack([s, 1 - s])
    witness = bool(np.any((s > tol) & (s < 1 - tol)))
    return SpectralRealization(Povm(res.projectors), stoch, 0, witness)


@dataclass(frozen=True, eq=False)
class OperationalTheory:
    """Finite preparations, measurements and the table ``p(k|M,P)``.

    ``table[m]`` is an array of shape ``(n_preparations, n_outcomes(m))``.
    ``states`` and ``povms`` are present when the theory was built from
    quantum objects.
    """

    preparations: tuple
    measurements: tuple
    table: tuple
    sharp: tuple
    outcome_labels: tuple = None
    states: tuple = None
    povms: tuple = None

    def __post_init__(self):
        preps, meas = tuple(self.preparations), tuple(self.measurements)
        if len(set(preps)) != len(preps) or len(set(meas)) != len(meas):
            raise LabelMismatch("preparation and measurement labels must be unique")
        table = tuple(np.array(t, dtype=float) for t in self.table)
        if len(table) != len(meas) or len(self.sharp) != len(meas):
            raise LabelMismatch("one table block and one sharpness flag per measurement")
        for mi, t in enumerate(table):
            if t.ndim != 2 or t.shape[0] != len(preps):
                raise DimensionMismatch(f"table block for {meas[mi]!r} has shape {t.shape}")
            if np.any(t < -cfg.TOL_SUM) or np.any(t > 1 + cfg.TOL_SUM):
                raise InvalidPovm(f"table block for {meas[mi]!r} leaves [0, 1]")
            if np.any(np.abs(t.sum(axis=1) - 1) > cfg.TOL_SUM):
                raise InvalidPovm(f"rows for {meas[mi]!r} do not sum to 1")
            t.setflags(write=False)
        outcomes = self.outcome_labels
        if outcomes is None:
            outcomes = tuple(tuple(range(t.shape[1])) for t in table)
        object.__setattr__(self, "preparations", preps)
        object.__setattr__(self, "measurements", meas)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "sharp", tuple(bool(s) for s in self.sharp))
        object.__setattr__(self, "outcome_labels", tuple(tuple(o) for o in outcomes))

    def prep_index(self, label) -> int:
        try:
            return self.preparations.index(label)
        except ValueError:
            raise LabelMismatch(f"unknown preparation {label!r}") from None

    def meas_index(self, label) -> int:
        try:
            return self.measurements.index(label)
        except ValueError:
            raise LabelMismatch(f"unknown measurement {label!r}") from None

    def probabilities(self, measurement, preparation) -> np.ndarray:
        return self.table[self.meas_index(measurement)][self.prep_index(preparation)]

    def prep_signature(self, p_index) -> np.ndarray:
        """All table entries for one preparation, concatenated over measurements."""
        return np.concatenate([t[p_index] for t in self.table])


def build_quantum_theory(states, povms, prep_labels=None, meas_labels=None) -> OperationalTheory:
    """Fill ``p(k|M,P)`` from the Born rule; flag each POVM sharp iff all elements are projectors."""
    states = tuple(as_density(r) for r in states)
    povms = tuple(povms)
    dims = {r.shape[0] for r in states} | {m.dim for m in povms}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed Hilbert-space dimensions {sorted(dims)}")
    prep_labels = tuple(prep_labels or (f"P{i}" for i in range(len(states))))
    meas_labels = tuple(meas_labels or (f"M{i}" for i in range(len(povms))))
    table = tuple(np.array([m.probabilities(r) for r in states]) for m in povms)
    return OperationalTheory(prep_labels, meas_labels, table,
                             sharp=tuple(m.is_sharp() for m in povms),
                             outcome_labels=tuple(m.labels for m in povms),
                             states=states, povms=povms)


def verify_P1(theory: OperationalTheory, tol=None) -> Report:
    """Check the certainty and mixture-indistinguishability feature of sharp measurements.

    For each sharp measurement and outcome there must be a listed
    preparation giving that outcome with probability at least ``1 - tol``.
    The uniform mixture (over outcomes) of the first such certifiers is then
    compared across every pair of sharp measurements on all listed
    measurements.
    """
    tol = cfg.check_tol() if tol is None else tol
    rep = Report("P1: sharp outcomes certifiable, certifier mixtures indistinguishable",
                 scope="indistinguishability is checked against the listed measurements only")
    mixtures = {}
    for mi, label in enumerate(theory.measurements):
        if not theory.sharp[mi]:
            continue
        t = theory.table[mi]
        certifiers = []
        for k, outcome in enumerate(theory.outcome_labels[mi]):
            hits = np.flatnonzero(t[:, k] >= 1 - tol)
            if len(hits) == 0:
                rep.violations.append({"clause": "certainty", "measurement": label,
                                       "outcome": outcome})
            else:
                certifiers.append(int(hits[0]))
        if len(certifiers) == t.shape[1]:
            mixtures[label] = np.mean([theory.prep_signature(p) for p in certifiers], axis=0)
            rep.details.setdefault("certifiers", {})[label] = [theory.preparations[p] for p in certifiers]
    names = list(mixtures)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            gap = float(np.max(np.abs(mixtures[a] - mixtures[b])))
            if gap > tol:
                rep.violations.append({"clause": "mixture", "measurements": [a, b], "gap": gap})
    rep.details["sharp_measurements"] = [m for m, s in zip(theory.measurements, theory.sharp) if s]
    return rep
