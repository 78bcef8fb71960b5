"""Concrete effect sets, POVMs and assignment problems used by the demos."""
from __future__ import annotations

import numpy as np

from .assign import ProblemBuilder
from .measurements import Povm, coarse_grain, fair_coin_povm, trine_projectors
from .operators import pure

I2 = np.eye(2, dtype=complex)

_AXES = {
    "x": (np.array([1, 1]), np.array([1, -1])),
    "y": (np.array([1, 1j]), np.array([1, -1j])),
    "z": (np.array([1, 0]), np.array([0, 1])),
}


def qubit_projector(axis: str, sign: int = +1) -> np.ndarray:
    """Projector onto the ``sign`` eigenstate of the Pauli operator along ``axis``."""
    plus, minus = _AXES[axis]
    return pure(plus if sign > 0 else minus)


def qubit_pvm(axis: str) -> Povm:
    return Povm(np.array([qubit_projector(axis, +1), qubit_projector(axis, -1)]), ("+", "-"))


def fair_coin_problem(mode="deterministic", refined=False):
    b = ProblemBuilder()
    b.povm(fair_coin_povm().effects)
    return b.build(mode, refined)


def cabello_nakamura_povms(e=None, f=None, g=None) -> list[Povm]:
    """Three four-outcome POVMs built from halves of E, I-E, F, I-F, G, I-G."""
    e = qubit_projector("z") if e is None else e
    f = qubit_projector("x") if f is None else f
    g = qubit_projector("y") if g is None else g

    def four(a, b):
        return Povm(np.array([a / 2, (I2 - a) / 2, b / 2, (I2 - b) / 2]))

    return [four(e, f), four(e, g), four(f, g)]


def cabello_nakamura_problem(mode="deterministic"):
    b = ProblemBuilder()
    for m in cabello_nakamura_povms():
        b.povm(m.effects)
    return b.build(mode)


def scalar_povm(p, q) -> Povm:
    return Povm(np.array([p / 2 * I2, (1 - p) / 2 * I2, q / 2 * I2, (1 - q) / 2 * I2]),
                ("p", "1-p", "q", "1-q"))


def coarse_grain_paradox_povms(p=1 / 3, q=1 / 4) -> dict[str, Povm]:
    """The four-outcome scalar POVM and its two coarse-grainings sharing I/2."""
    if not (0 < p < 1 and 0 < q < 1) or 0.5 in (p, q) or p == q:
        raise ValueError("need 0 < p, q < 1 with p, q != 1/2 and p != q")
    m = scalar_povm(p, q)
    return {
        "fine": m,
        "first-pair": coarse_grain(m, [("p", "1-p"), ("q",), ("1-q",)]),
        "last-pair": coarse_grain(m, [("p",), ("1-p",), ("q", "1-q")]),
    }


def coarse_grain_paradox_problem(p=1 / 3, q=1 / 4, mode="deterministic", refined=False):
    povms = coarse_grain_paradox_povms(p, q)
    b = ProblemBuilder()
    for m in povms.values():
        b.povm(m.effects)
    fine = povms["fine"]
    b.sum(I2 / 2, [fine["p"], fine["1-p"]])
    b.sum(I2 / 2, [fine["q"], fine["1-q"]])
    return b.build(mode, refined)


def same_effect_twice_problem(p=1 / 3, mode="deterministic", refined=True, with_f=True):
    """Fair coin ``{I/2, I/2}`` alongside ``{I/2, p/2 I, (1-p)/2 I}``."""
    b = ProblemBuilder()
    b.povm([I2 / 2, I2 / 2])
    if with_f:
        b.povm([I2 / 2, p / 2 * I2, (1 - p) / 2 * I2])
    return b.build(mode, refined)


def trine_problem(mode="spectral"):
    b = ProblemBuilder()
    b.povm(2 / 3 * trine_projectors())
    return b.build(mode)


def xyz_projectors() -> np.ndarray:
    return np.array([qubit_projector(a, s) for a in "xyz" for s in (+1, -1)])


def xyz_problem(mode="deterministic"):
    b = ProblemBuilder()
    for a in "xyz":
        b.povm(qubit_pvm(a).effects)
    return b.build(mode)


def random_unitary(rng, d) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_effect(rng, d, kind=None) -> np.ndarray:
    """Random effect of a given ``kind``: projector, degenerate, or generic.

    Degenerate effects repeat one eigenvalue so spectral merging is exercised.
    """
    kind = kind or rng.choice(["projector", "degenerate", "generic"])
    if kind == "projector":
        s = rng.integers(0, 2, size=d).astype(float)
    elif kind == "degenerate":
        s = rng.choice([0.0, 1.0, rng.uniform(0.05, 0.95)], size=d)
        s[0] = s[-1] = rng.uniform(0.05, 0.95)
    else:
        s = rng.uniform(0, 1, size=d)
    u = random_unitary(rng, d)
    e = (u * s) @ u.conj().T
    return (e + e.conj().T) / 2
