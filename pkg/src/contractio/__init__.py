"""Exact-arithmetic models of totally disconnected contraction groups.

The block model assembles groups from shift, linear, and Heisenberg blocks
with a blockwise contractive automorphism, and supports composition series
in two operator modes, Jordan-Holder verification, scale modules with
lattice-index cross-checks, classification of simple blocks, and the
torsion x divisible structure decomposition.
"""

from .errors import (
    ContractioError,
    DslSyntaxError,
    InconclusiveError,
    NoRootError,
    NotCoprimeError,
    NotSimpleError,
    NotSquarefreeError,
    TooLargeError,
    UncertifiedError,
    UncertifiedFactorizationError,
    ValidationError,
)
from .padic import (
    Certification,
    CertifiedFactorization,
    Factor,
    NewtonPolygon,
    PAdicContext,
    Poly,
    RationalScalar,
    factor_over_qp,
    hensel_lift,
    is_contractive_poly,
    newton_polygon,
    poly_to_str,
    valuation,
)
from .finitegroup import (
    FiniteGroup,
    FiniteSeries,
    IsoLabel,
    chief_series_finite,
    composition_series_finite,
    is_simple_finite,
    iso_finite,
    iso_label,
    make_catalog_group,
)
from .groupmodel import (
    ContractionGroup,
    GroupElement,
    HeisenbergBlock,
    LinearBlock,
    ShiftBlock,
    StandardLattice,
    contractivity_oracle,
    module_delta,
)
from .series import (
    FactorClass,
    HeisenbergSub,
    JordanHolderReport,
    LinearSub,
    Mode,
    PadicFactor,
    SeriesChain,
    ShiftSub,
    TorsionFactor,
    canonical_series,
    check_length_bound,
    check_module_multiplicativity,
    check_special_chain,
    composition_series,
    jordan_holder_verify,
    refine,
    stable_hull,
    validate_chain,
)
from .theorems import (
    ClassificationLabel,
    StructureReport,
    classify_simple,
    divisible_part,
    is_simple_contraction,
    iso_simple,
    rational_normal_form,
    t_alpha,
    torsion_part,
    verify_structure,
)
from .dsl import GroupSpecDocument, Settings, parse, print_document

__version__ = "0.1.0"
