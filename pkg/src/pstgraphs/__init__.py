"""Perfect state transfer on weighted spin graphs.

Graphs are reduced to equivalent linear chains with Givens similarity
rotations; transfer is then decided on the chain and confirmed by direct
time evolution of the graph.
"""

from ._backend import BACKEND
from .givens import (
    ChainBlock,
    GivensRotation,
    ReductionResult,
    apply_similarity,
    rotation_zeroing,
    site_image,
    split_blocks,
    tridiagonalize,
)
from .graph import (
    SpinGraph,
    build_graph,
    degree_constraint_check,
    graph_distance,
    is_bipartite,
    load_graph,
    one_excitation_hamiltonian,
    save_graph,
)
from .spectral import (
    PTReport,
    ProbabilitySeries,
    Spectrum,
    chain_pt_couplings,
    eigendecompose,
    jacobi_from_spectrum,
    mirror_symmetric,
    probability_series,
    pt_chain_check,
    pt_pair_search,
    transfer_probability,
)

__version__ = "0.1.0"

from .design import (  # noqa: E402
    DesignProblem,
    DesignSolution,
    piecewise_evolve,
    retrieval_schedule,
    solve_parameters,
    verify_design,
)
