"""Exact Siegel theta series of even lattices and their Hecke images at p and p^2."""
from .closed_forms import (
    IndexOutOfRange,
    MixedGenus,
    NeighborLattice,
    NotInOverlattice,
    OmegaProfile,
    Report,
    b_j_closed,
    c_tilde_closed,
    dual_path_b,
    dual_path_c_tilde,
    eigenvalue_lambda_j,
    enumerate_Kj,
    genus_average,
    omega_profile,
    verify_commutation,
    verify_eigenform,
    verify_operator_identity,
    verify_vanishing,
)
from .fourier import FourierMap, InsufficientBound
from .fqspace import (
    AnisotropicSpace,
    FqQuadSpace,
    Residual,
    Subspace,
    WittDecomposition,
    complement_class,
    decompose,
    find_isotropic,
    phi_brute,
    phi_general,
    phi_regular,
    radical,
    reduction_rhs,
)
from .gramclass import GramClass, aut_order, canonicalize, class_inventory
from .hecke import (
    HeckeContext,
    alpha_j,
    apply_Tp,
    apply_Tp_squared,
    apply_Tprime,
    apply_Ttilde,
    enumerate_between,
    operator_identity_check,
)
from .lattice import (
    DividesLevel,
    IntegralLattice,
    character_at,
    count_representations,
    level,
    mod_p_space,
    theta_coefficients,
    theta_series,
)
from .qanalog import beta, delta, lemma42_closed, lemma42_sum, mu

__version__ = "0.1.0"
