"""Weight bookkeeping for mod-p Hilbert modular forms: Hasse invariants,
Theta operators and the weight-shifting reconstruction of a form from its
Theta-derived companions."""

from .derivation import (
    DerivationReport,
    check_hypotheses,
    classify_Mprime,
    compute_M,
    compute_Mtilde,
    derive_kmu,
    derive_kprime,
    hasdiv_chain,
    hasdiv_pattern,
    reconstruct,
)
from .errors import ConsistencyError, InputError, SymbolContextError, UndecidableError
from .lattice import (
    Affine,
    Embedding,
    EmbeddingSet,
    SymbolContext,
    Tri,
    Weight,
    coeff_cmp,
    evaluate,
    format_coeff,
    in_minimal_cone,
    is_algebraic,
    make_embedding_set,
    parse_coeff,
)
from .operators import (
    CONDITION_3,
    EigenProps,
    FormExpr,
    apply_theta,
    dk_divisibility,
    hasse_weight,
    mul_hasse,
    reduce_to_min_cone,
    theta_shift,
)

__all__ = [name for name in dir() if not name.startswith("_")]
