"""JSON encodings of operators, theories, models and assignment problems.

Complex entries are ``[re, im]`` pairs, matrices are row-major nested
lists. Theory tables are nested ``[measurement][preparation][outcome]``.
Decoders raise :class:`~ncwb.errors.SchemaError` naming the offending field.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import _config as cfg
from .assign import AssignmentProblem, Relation
from .errors import NcwbError, SchemaError
from .measurements import OperationalTheory, Povm, build_quantum_theory
from .ontology import OntologicalModel
from .operators import as_density


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(obj, path="matrix", dim=None) -> np.ndarray:
    if isinstance(obj, dict):
        if "entries" not in obj:
            raise SchemaError(path, "operator object needs 'entries'")
        dim = obj.get("dim", dim)
        obj = obj["entries"]
        path = f"{path}.entries"
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(path, "entries must be numeric [re, im] pairs") from None
    if arr.ndim == 2:  # real shorthand
        arr = np.stack([arr, np.zeros_like(arr)], axis=-1)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise SchemaError(path, f"expected an n x n array of [re, im] pairs, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise SchemaError(path, f"matrix is {arr.shape[0]}x{arr.shape[0]}, expected dim {dim}")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_operator(m) -> dict:
    m = np.asarray(m)
    return {"dim": int(m.shape[0]), "entries": encode_matrix(m)}


def decode_operator(obj, path="operator") -> np.ndarray:
    return decode_matrix(obj, path)


def _get(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}.{key}" if path else key, "missing field")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return val


def encode_theory(theory: OperationalTheory) -> dict:
    out = {"preparations": [], "measurements": [],
           "table": [t.tolist() for t in theory.table]}
    if theory.states is not None:
        out["dim"] = int(theory.states[0].shape[0])
    for i, p in enumerate(theory.preparations):
        entry = {"label": p}
        if theory.states is not None:
            entry["rho"] = encode_matrix(theory.states[i])
        out["preparations"].append(entry)
    for i, m in enumerate(theory.measurements):
        entry = {"label": m, "sharp": theory.sharp[i]}
        if theory.povms is not None:
            entry["effects"] = [encode_matrix(e) for e in theory.povms[i].effects]
        else:
            entry["outcomes"] = theory.table[i].shape[1]
        out["measurements"].append(entry)
    return out


def decode_theory(obj, tol=None) -> OperationalTheory:
    tol = cfg.check_tol() if tol is None else tol
    if not isinstance(obj, dict):
        raise SchemaError("theory", "expected a JSON object")
    preps = _get(obj, "preparations", "", list)
    meas = _get(obj, "measurements", "", list)
    dim = obj.get("dim")
    quantum = all(isinstance(p, dict) and "rho" in p for p in preps) and \
        all(isinstance(m, dict) and "effects" in m for m in meas)
    plabels = [str(_get(p, "label", f"preparations[{i}]")) for i, p in enumerate(preps)]
    mlabels = [str(_get(m, "label", f"measurements[{i}]")) for i, m in enumerate(meas)]
    if quantum:
        states, povms = [], []
        for i, p in enumerate(preps):
            path = f"preparations[{i}].rho"
            try:
                states.append(as_density(decode_matrix(p["rho"], path, dim)))
            except SchemaError:
                raise
            except NcwbError as exc:
                raise SchemaError(path, str(exc)) from None
        for i, m in enumerate(meas):
            path = f"measurements[{i}].effects"
            effects = _get(m, "effects", f"measurements[{i}]", list)
            try:
                mats = [decode_matrix(e, f"{path}[{k}]", dim) for k, e in enumerate(effects)]
                povms.append(Povm(np.array(mats)))
            except SchemaError:
                raise
            except NcwbError as exc:
                raise SchemaError(path, str(exc)) from None
        try:
            theory = build_quantum_theory(states, povms, plabels, mlabels)
        except NcwbError as exc:
            raise SchemaError("theory", str(exc)) from None
        for i, m in enumerate(meas):
            if "sharp" in m and bool(m["sharp"]) != theory.sharp[i]:
                raise SchemaError(f"measurements[{i}].sharp",
                                  f"flag {m['sharp']} contradicts the effects (sharp={theory.sharp[i]})")
        if "table" in obj:
            given = _decode_table(obj["table"], theory.table)
            for mi, (g, t) in enumerate(zip(given, theory.table)):
                gap = np.abs(g - t)
                if np.max(gap) > tol:
                    pi, k = np.unravel_index(np.argmax(gap), gap.shape)
                    raise SchemaError(f"table[{mi}][{pi}][{k}]",
                                      f"disagrees with the Born rule by {gap[pi, k]:.3e}")
        return theory
    if "table" not in obj:
        raise SchemaError("table", "required when states or effects are absent")
    sharp = [bool(_get(m, "sharp", f"measurements[{i}]")) for i, m in enumerate(meas)]
    table = _decode_table(obj["table"], None, len(mlabels), len(plabels))
    try:
        return OperationalTheory(tuple(plabels), tuple(mlabels), tuple(table), tuple(sharp))
    except NcwbError as exc:
        raise SchemaError("table", str(exc)) from None


def _decode_table(raw, like, n_meas=None, n_prep=None):
    if not isinstance(raw, list):
        raise SchemaError("table", "expected a list per measurement")
    n_meas = len(like) if like is not None else n_meas
    if len(raw) != n_meas:
        raise SchemaError("table", f"expected {n_meas} measurement blocks, got {len(raw)}")
    out = []
    for mi, block in enumerate(raw):
        try:
            arr = np.asarray(block, dtype=float)
        except (TypeError, ValueError):
            raise SchemaError(f"table[{mi}]", "non-numeric entries") from None
        want_rows = like[mi].shape[0] if like is not None else n_prep
        if arr.ndim != 2 or arr.shape[0] != want_rows or (like is not None and arr.shape != like[mi].shape):
            raise SchemaError(f"table[{mi}]", f"unexpected shape {arr.shape}")
        out.append(arr)
    return out


def encode_model(model: OntologicalModel) -> dict:
    return {"ontic_states": list(model.ontic_states),
            "epistemic": {p: mu.tolist() for p, mu in model.epistemic.items()},
            "responses": {m: xi.tolist() for m, xi in model.responses.items()}}


def decode_model(obj, tol=cfg.TOL_SUM) -> OntologicalModel:
    if not isinstance(obj, dict):
        raise SchemaError("model", "expected a JSON object")
    states = [str(s) for s in _get(obj, "ontic_states", "", list)]
    n = len(states)
    epi_raw = _get(obj, "epistemic", "", dict)
    resp_raw = _get(obj, "responses", "", dict)
    epi, resp = {}, {}
    for p, mu in epi_raw.items():
        path = f"epistemic.{p}"
        try:
            mu = np.asarray(mu, dtype=float)
        except (TypeError, ValueError):
            raise SchemaError(path, "non-numeric entries") from None
        if mu.shape != (n,):
            raise SchemaError(path, f"expected {n} values, one per ontic state")
        if np.any(mu < -tol):
            lam = states[int(np.argmin(mu))]
            raise SchemaError(f"{path}[{lam}]", f"negative probability {mu.min():.6g}")
        if abs(mu.sum() - 1) > tol:
            raise SchemaError(path, f"sums to {mu.sum():.12g}, not 1")
        epi[p] = mu
    for m, xi in resp_raw.items():
        path = f"responses.{m}"
        try:
            xi = np.asarray(xi, dtype=float)
        except (TypeError, ValueError):
            raise SchemaError(path, "non-numeric entries") from None
        if xi.ndim != 2 or xi.shape[1] != n:
            raise SchemaError(path, f"expected [outcome][ontic state] with {n} states, got shape {xi.shape}")
        for k, lam in zip(*np.nonzero((xi < -tol) | (xi > 1 + tol))):
            raise SchemaError(f"{path}[{k}][{states[lam]}]", f"value {xi[k, lam]:.6g} outside [0, 1]")
        sums = xi.sum(axis=0)
        for lam in np.flatnonzero(np.abs(sums - 1) > tol):
            raise SchemaError(f"{path}[*][{states[lam]}]",
                              f"outcome probabilities for ({m}, {states[lam]}) sum to {sums[lam]:.12g}, not 1")
        resp[m] = xi
    return OntologicalModel(tuple(states), epi, resp)


def encode_problem(p: AssignmentProblem) -> dict:
    return {"effects": [encode_matrix(e) for e in p.effects],
            "relations": [r.to_dict() for r in p.relations],
            "mode": p.mode, "refined": p.refined}


def decode_problem(obj, mode=None) -> AssignmentProblem:
    if not isinstance(obj, dict):
        raise SchemaError("problem", "expected a JSON object")
    raw_effects = _get(obj, "effects", "", list)
    effects = [decode_matrix(e, f"effects[{i}]") for i, e in enumerate(raw_effects)]
    rels = []
    for i, r in enumerate(_get(obj, "relations", "", list)):
        path = f"relations[{i}]"
        try:
            rels.append(Relation(_get(r, "kind", path), _get(r, "indices", path, list),
                                 r.get("coeffs", ())))
        except SchemaError:
            raise
        except NcwbError as exc:
            raise SchemaError(path, str(exc)) from None
    mode = mode or obj.get("mode", "deterministic")
    try:
        arr = np.array(effects) if effects else np.zeros((0, 1, 1), dtype=complex)
        return AssignmentProblem(arr, tuple(rels), mode, bool(obj.get("refined", False)))
    except NcwbError as exc:
        raise SchemaError("problem", str(exc)) from None


def load_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise SchemaError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON ({exc.msg} at line {exc.lineno})") from None


def dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
