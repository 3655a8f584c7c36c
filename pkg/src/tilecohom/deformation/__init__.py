"""Shape deformations, weak-cohomology demonstrations and smoothing."""

from .maps import (
    ConjugateToOriginal,
    Deformation,
    DeformationError,
    Inconclusive,
    NotConjugate,
    OrbitMap,
    conjugacy_check,
    deform_tiling,
    deformation_class,
    deformation_class_at_level,
    length_differences,
    lipschitz_constants,
    make_deformation,
    orbit_map,
)
from .smoothing import PlateauKernel, SmoothedMap, SmoothingRefused, smooth_cocycle, smoothing_sweep
from .weak import (
    DefectTable,
    GrowthFit,
    SiblingPair,
    find_sibling_pair,
    geometric_series_cochain,
    sibling_discrepancy,
    strongly_pe_defect,
    unboundedness_growth,
)
