"""Default numerical tolerances and environment switches.

``NCWB_TOL`` overrides the verification tolerance used by the report-style
checks (adequacy, operational equivalence, relation residues).
``NCWB_DISABLE_NUMBA=1`` forces the pure-numpy enumeration kernels.
"""
import os

TOL_HERM = 1e-9
TOL_SUM = 1e-9
TOL_TRACE = 1e-9
TOL_EIG = 1e-8
TOL_DEGEN = 1e-7
TOL_DEDUP = 1e-9
TOL_PSD = 1e-8


def check_tol(default=1e-9):
    """Verification tolerance, honouring ``NCWB_TOL`` when set."""
    raw = os.environ.get("NCWB_TOL")
    if raw:
        return float(raw)
    return default


def numba_disabled():
    return os.environ.get("NCWB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}
