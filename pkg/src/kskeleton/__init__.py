"""K-skeleton factorizations and Fredholm indices of Laurent-type operators
on l2(Z)."""

from .errors import (
    DecayCheckFailed,
    DiagonalBlockSingular,
    GridUnderresolved,
    IndexDisagreement,
    IndexJump,
    IndexMismatch,
    InconsistentComponent,
    InfiniteDefect,
    InputError,
    KSkeletonError,
    NormExceedsOne,
    NotConverged,
    NotInvertible,
    NotPartialIsometry,
    NotSkeleton,
    NotStabilized,
    ResidualTooLarge,
    ResolutionError,
    SingularTruncation,
    TruncationFailure,
    VerificationError,
    WindowTooSmall,
    ZeroIndex,
)
from .factorize import (
    AlternativeFactorization,
    DilationUnitary,
    HalmosDilation,
    LowRankOperator,
    SkeletonFactorization,
    alternative_factor,
    dilation_skeleton,
    family_factor,
    halmos_dilation,
    skeleton_factor,
    verify_factorization,
)
from .index import (
    IndexReport,
    analytic_index,
    family_index,
    index_of_factorization,
    index_report,
    numeric_index,
)
from .operators import (
    Block,
    BlockDecomposition,
    CorrectedLaurentOp,
    HardyProjection,
    SparseFinite,
    TruncationWindow,
    adjoint,
    block_decompose,
    commutator_with_p,
    compose,
    identity,
    invert_on_window,
    laurent_op,
    shift_power,
    truncate,
)
from .specmap import ComponentMap, GridSpec, cyclic_metadata, label_components, spectrum_curve, winding_map
from .symbol import (
    LaurentSymbol,
    WienerHopfSplit,
    evaluate,
    invertibility_margin,
    wiener_hopf,
    winding_number,
)

__version__ = "0.1.0"
