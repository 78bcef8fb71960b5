"""Regenerate the JSON fixtures shipped in src/ncwb/fixtures."""
from pathlib import Path

import numpy as np

from ncwb import io, scenarios
from ncwb.ontology import (OntologicalModel, fair_coin_model, fair_coin_theory, ontic_extend)
from ncwb.wigner import stabilizer_fragment, wigner_model

OUT = Path(__file__).resolve().parents[1] / "src" / "ncwb" / "fixtures"


def main():
    OUT.mkdir(exist_ok=True)
    files = {}
    files["fair-coin-theory.json"] = io.encode_theory(fair_coin_theory())
    files["fair-coin-model.json"] = io.encode_model(fair_coin_model())
    bad = io.encode_model(fair_coin_model())
    bad["responses"]["M"] = [[0.5], [0.4]]
    files["bad-response-sum-model.json"] = bad

    labels = ("M", "M'")
    files["bit-flip-theory.json"] = io.encode_theory(fair_coin_theory(labels))
    ext = ontic_extend(fair_coin_model(labels), "M").with_relabelled("M", (1, 0), "M'")
    files["bit-flip-extended-model.json"] = io.encode_model(ext.to_finite_model())

    theory = stabilizer_fragment()
    files["wigner-theory.json"] = io.encode_theory(theory)
    files["wigner-model.json"] = io.encode_model(wigner_model(theory))

    files["fair-coin.json"] = io.encode_problem(scenarios.fair_coin_problem())
    files["cabello-nakamura.json"] = io.encode_problem(scenarios.cabello_nakamura_problem())
    files["coarse-grain-paradox.json"] = io.encode_problem(scenarios.coarse_grain_paradox_problem())
    files["same-effect-twice.json"] = io.encode_problem(scenarios.same_effect_twice_problem())
    files["trine.json"] = io.encode_problem(scenarios.trine_problem())
    files["xyz.json"] = io.encode_problem(scenarios.xyz_problem())
    for name, obj in files.items():
        io.dump_json(obj, OUT / name)
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
