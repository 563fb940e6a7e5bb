"""Irreps structure of finite-dimensional operator algebras by scattering projections.

Typical use::

    from irrepscatter import decompose, reduce_hamiltonian
    dec = decompose([h1, h2])
    dec.bpt.shapes                 # [(rows, cols), ...] per block
    reduce_hamiltonian(h, dec.wedderburn).blocks
"""

from .bipartition import (
    BipartitionTable,
    Block,
    Decomposition,
    IsometryFamily,
    WedderburnDecomposition,
    bpt_from_network,
    decompose,
    isometries_from_bpt,
    product_bpt,
    transpose,
    verify_membership,
    wedderburn_from_bpt,
)
from .coarse import (
    OperatorSystemBasis,
    PartialBipartitionTable,
    probability_distortion,
    pull_back,
    push_forward,
    skl_from_partial_bpt,
    trace_out_partial,
)
from .errors import CertificationError, InputError, IrrepError
from .lattice import (
    LatticeConfig,
    coarse_projections,
    delta_fn,
    on_curve_value,
    p_agree_bounds,
    p_agree_closed,
    p_agree_direct,
    p_agree_state,
    regime_scan,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    PartialIsometry,
    Projection,
    ToleranceConfig,
    hs_inner,
    normalize_to_isometry,
    spectral_projections,
)
from .reduction import (
    DensityMatrix,
    FiniteGroupRep,
    StateReductionMap,
    SymmetrySplit,
    factorize,
    partial_trace,
    purity_timeseries,
    reduce_commutant_side,
    reduce_hamiltonian,
    reduce_state,
    split_symmetry,
)
from .scattering import (
    UNKNOWN,
    ReflectionNetwork,
    Reflecting,
    build_initial_network,
    establish_completeness,
    establish_minimality,
    maximal_orthogonal_set,
    path_isometry,
    run_scattering,
    scatter,
    scatter_until_proper,
)

__version__ = "0.1.0"
