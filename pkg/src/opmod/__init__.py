"""Computations with finite-dimensional C*-algebras and Hilbert C*-modules.

The package certifies whether a module map preserves orthogonality by
extracting the central positive multiplier that intertwines the inner
products, factors certified maps through a central scaling followed by an
inner-product isometry, and realizes the linking-algebra corner extensions
with numerically verified product laws.
"""

from .algebra import (
    AlgebraElement,
    AmplifiedElement,
    BoundaryAmbiguityWarning,
    CentralPositive,
    FdCStarAlgebra,
    IdealDescriptor,
    center_basis,
    central_cover,
    ideal_generated_by,
    is_positive,
    make_algebra,
    norm,
    spectral_projection,
    support_projection,
)
from .analysis import (
    AnalysisReport,
    analyze_bundle,
    degradation_table,
    load_report,
    save_report,
)
from .errors import (
    DomainError,
    GenerationError,
    IncompatibilityError,
    InternalInconsistencyError,
    InvalidInputError,
    OpmodError,
    ParseError,
    PreconditionError,
    ValidationError,
    ZeroModuleError,
)
from .instances import (
    InstanceBundle,
    gallery,
    gen_adversarial,
    gen_algebra,
    gen_module,
    gen_perturbed,
    gen_planted_preserver,
    load_instance,
    save_instance,
)
from .linking import (
    LinkingAlgebra,
    LinkingElement,
    LinkingMultiplier,
    PreserverExtension,
    build_linking,
    corner_extension,
    embed_element,
    extension_pair,
    induced_compact_map,
    multiplier_apply,
)
from .modules import (
    CompactOperator,
    HilbertModule,
    ModuleElement,
    ModuleMap,
    adjoint_map,
    apply_map,
    complex_basis,
    compute_ideal,
    corestrict,
    image_submodule,
    inner_product,
    is_orthogonal,
    make_module,
    make_module_map,
    map_norm,
    module_norm,
    random_element,
    rank_one_operator,
    right_action,
)
from .preserver import (
    BijectivityReport,
    Decomposition,
    IdealCheckReport,
    InjectivityReport,
    NotPreserver,
    PreserverCertificate,
    SampleResidualReport,
    SearchExhausted,
    ViolationWitness,
    bijective_analysis,
    decompose,
    extract_witness,
    find_violating_pair,
    image_ideal_check,
    injectivity_analysis,
    verify_certificate,
)
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__version__ = "0.1.0"
