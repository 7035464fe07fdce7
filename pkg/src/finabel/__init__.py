"""Harmonic analysis toolkit on finite Abelian groups.

Exact group/character arithmetic, dense transforms, a nearest-integer
rounding calculus, minimal-l1 interpolation on an in-house simplex,
coset-structured decompositions with verified subgroup chains, rounding
norm certificates, a Riemann-sum discretization of the algebra norm,
and measure-synthesis experiment drivers.
"""

from .config import Config, DEFAULT_CONFIG, load_config
from .errors import FinabelError
from .group_core import (
    FiniteAbelianGroup,
    Subgroup,
    annihilator,
    enumerate_subgroups,
    make_group,
    pair,
    pair_is_trivial,
    parse_group_spec,
    quotient_dual_iso,
    subgroup_intersect,
    subgroup_span,
)
from .fourier import (
    GroupFunction,
    NormReport,
    band_project,
    convolve,
    dft,
    idft,
    natural_spectrum_check,
    norms,
    spectrum_sigma,
    subgroup_haar,
)
from .rounding import RoundingResult, dist_to_int, real_reduce, round_int
from .bpb_lp import (
    BpbPolynomial,
    LpProblem,
    bpb_search,
    lp_min_l1,
    simplex_solve,
)
from .idempotent import (
    CorkeyChain,
    IdempotentDecomposition,
    corkey_build,
    decompose_int,
)
from .certifier import (
    RiemannFrequency,
    SknResult,
    TwsCertificate,
    certify_tws,
    riemann_a_norm,
    skn_finite,
)
from .pipeline import (
    DecaySequence,
    PipelineReport,
    glow_run,
    make_sequence,
    najp_run,
    synth_measure,
    synth_measure_detailed,
)

__version__ = "0.1.0"
