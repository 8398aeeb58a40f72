"""Butterfly trees and their Horton-Strahler numbers.

Exact distributions, compressed-code algorithms, and Monte Carlo checks.
"""

from .core_tree import (
    NIL,
    BinaryTree,
    bst_from_permutation,
    glue_minus,
    glue_plus,
    height,
    hs,
    hs_labeling,
    max_hs_for_size,
    reflect,
)
from .exact_dist import (
    check_interlacing,
    f_poly,
    g_poly,
    h_poly,
    isolate_real_roots,
    mean_closed,
    moment,
    pmf,
    quasi_power_eval,
    tau_star,
    u_derivatives_at_zero,
    variance_closed,
)
from .hs_fast import (
    hs_increments,
    hs_nonsimple,
    hs_nonsimple_batch,
    hs_simple,
    hs_simple_batch,
    hs_support_bound,
)
from .markov import (
    argmax_sigma2,
    build_chain,
    char_poly,
    char_poly_check,
    mu,
    poisson_closed_form,
    sigma2,
    sigma2_via_poisson,
    solve_poisson,
    stationary,
    variance_mean_ratio,
)
from .montecarlo import (
    RngStream,
    block_experiment,
    chi_square_gof,
    clt_standardize,
    fclt_paths,
    run_hs_experiment,
    sample_simple_code,
    sample_uniform_ebt,
)
from .permutations import (
    direct_sum,
    expand_butterfly,
    expand_simple,
    kronecker,
    lis_lds,
    simple_height_formula,
    skew_sum,
    tree_from_butterfly_code,
    tree_from_simple_code,
)

__version__ = "0.1.0"
