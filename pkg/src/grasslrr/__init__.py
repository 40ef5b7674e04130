"""Subspace clustering by low-rank self-representation of Grassmann points."""

from .admm import (
    AdmmConfig,
    AdmmReport,
    AdmmState,
    admm_solve,
    dense_reference,
    e_step,
    mu_update,
    rho_rule,
    svt,
    z_step,
)
from .closed_form import (
    ClosedFormReport,
    DeltaMatrix,
    LowRankCoefficients,
    build_delta,
    glrr_f_solve,
    kglrr_solve,
)
from .clustering import (
    ClusterLabels,
    NcutConfig,
    affinity_from_Z,
    cluster_pipeline,
    kmeans,
    ncut,
)
from .dataio import (
    ImageSet,
    Manifest,
    SynthSpec,
    build_point,
    load_dataset,
    load_manifest,
    read_labels,
    read_matrix,
    save_results,
    synth_union,
    write_labels,
    write_matrix,
)
from .errors import (
    GrassLrrError,
    InfeasibleSpecError,
    InvalidConfigError,
    InvalidInputError,
    NumericalDivergenceError,
    OracleTooLargeError,
    RankDeficientError,
)
from .evaluation import EvalReport, accuracy, hungarian
from .kernels import (
    KernelMatrix,
    KernelSpec,
    PrincipalAngles,
    gram,
    k_cc,
    k_ccp,
    k_projection,
    kernel_sqrt,
    principal_angle_cosines,
    psd_clamp,
)
from .manifold import (
    GrassmannPoint,
    SymEig,
    ThinSvd,
    grassmann_distance,
    orthonormalize,
    project_embed,
    sym_eig,
    thin_svd,
)
from .rng import SplitMix64

__version__ = "0.1.0"
