"""Hypothesis strategies for small random operators."""
import numpy as np
from hypothesis import strategies as st

from ncwb.scenarios import random_density, random_effect, random_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)


@st.composite
def unitaries(draw, d=None):
    d = d or draw(dims)
    return random_unitary(np.random.default_rng(draw(seeds)), d)


@st.composite
def densities(draw, d=None):
    d = d or draw(dims)
    return random_density(np.random.default_rng(draw(seeds)), d)


@st.composite
def effects(draw, d=None, kind=None):
    d = d or draw(dims)
    kind = kind or draw(st.sampled_from(["projector", "degenerate", "generic"]))
    return random_effect(np.random.default_rng(draw(seeds)), d, kind)
