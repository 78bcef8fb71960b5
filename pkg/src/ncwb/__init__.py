"""Noncontextuality workbench.

Finite operational theories built from density operators and POVMs,
ontological models with noncontextuality checks, exact enumeration of
value assignments, and a discrete Wigner model for a qutrit fragment.
"""
from importlib import resources

from .assign import (Assignment, AssignmentProblem, GleasonCertificate, ProblemBuilder, Relation,
                     check_ks_rules, check_nc_rules, enumerate_assignments,
                     enumerate_deterministic_assignments, enumerate_spectral_assignments,
                     filter_effects_above_half, gleason_feasibility, merged_spectrum,
                     relation_residues, response_from_projector_valuation)
from .demos import DEMOS, DemoOptions, DemoReport, check_files, run_demo, solve_assignment
from .errors import *  # noqa: F401,F403
from .measurements import (NaimarkExtension, OperationalTheory, Povm, build_quantum_theory,
                           coarse_grain, convex_mix, fair_coin_naimark_pair, naimark_extend,
                           post_process, reduce, spectral_realization, trine_povm, verify_P1)
from .ontology import (ExtendedModel, OntologicalModel, bit_flip_extension_demo,
                       check_measurement_noncontextual, check_preparation_noncontextual,
                       empirical_adequacy, is_outcome_deterministic, ontic_extend,
                       verify_determinism_iff_sharp)
from .operators import (born, is_density, is_effect, is_hermitian, is_projector,
                        partial_trace_second, spectral_decompose)
from .report import Report

__version__ = "0.1.0"


def fixture_path(name):
    """Path of a shipped JSON fixture, e.g. ``fixture_path("trine.json")``."""
    return resources.files(__name__) / "fixtures" / name
