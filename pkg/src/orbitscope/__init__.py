"""orbitscope: dual-orbit structure, integrability verdicts, and admissible
wavelets for abelian matrix dilation groups."""

__version__ = "0.1.0"

from .linalg import (
    DilationAlgebra,
    RootDecomposition,
    check_commuting,
    mat_exp,
    rank_tol,
    roots_decompose,
    triangularize,
)
from .orbits import (
    GroupElement,
    SampleSpec,
    StratumReport,
    coadjoint_orbit_dim,
    dual_act,
    is_admissible,
    orbit_dim,
    stabilizer_dim,
    stratify,
)
from .sections import (
    LayeredFamily,
    SectionPoint,
    case1_sections,
    layer_index,
    normal_form,
    section_point,
)
from .classify import (
    ClassificationVerdict,
    classify3,
    classify_diag_nilpotent,
    classify_one_param,
)
from .quasisection import (
    BoxSet,
    DiagonalizedAction,
    MeetingSetDescription,
    ParamInequalitySystem,
    c_i_box,
    describe_meeting_set,
    diagonal_action,
    is_relatively_compact,
    meeting_system,
    quasi_section_verdict,
    shell_box,
)
from .wavelet import (
    BumpFunction,
    CalderonReport,
    TransformGrid,
    WaveletSpec,
    bump,
    calderon_check,
    cwt,
    l1_estimate,
    sigma,
    synth_wavelet,
)

__all__ = [
    "DilationAlgebra",
    "RootDecomposition",
    "GroupElement",
    "LayeredFamily",
    "SectionPoint",
    "SampleSpec",
    "StratumReport",
    "check_commuting",
    "mat_exp",
    "rank_tol",
    "roots_decompose",
    "triangularize",
    "dual_act",
    "orbit_dim",
    "stabilizer_dim",
    "coadjoint_orbit_dim",
    "is_admissible",
    "stratify",
    "normal_form",
    "layer_index",
    "section_point",
    "case1_sections",
    "ClassificationVerdict",
    "classify3",
    "classify_diag_nilpotent",
    "classify_one_param",
    "BoxSet",
    "DiagonalizedAction",
    "MeetingSetDescription",
    "ParamInequalitySystem",
    "c_i_box",
    "describe_meeting_set",
    "diagonal_action",
    "is_relatively_compact",
    "meeting_system",
    "quasi_section_verdict",
    "shell_box",
    "BumpFunction",
    "CalderonReport",
    "TransformGrid",
    "WaveletSpec",
    "bump",
    "calderon_check",
    "cwt",
    "l1_estimate",
    "sigma",
    "synth_wavelet",
    "__version__",
]
