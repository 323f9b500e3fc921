"""Digital trees over probabilistic sources: exact costs, asymptotics, tameness.

The package splits into source models (`sources`, `simple`, `dynamics`), tree
cost measurement (`words`, `trees`), analytic machinery (`analysis`,
`operator`, `diophantine`) and classification (`tameness`).  The `cli` module
wires everything into the `tamelab` command.
"""

from .errors import (
    TamelabError,
    PrecisionExhausted,
    TruncationBudget,
    KernelUnderflow,
    QuasiInversePole,
    NotEntropic,
    UnsupportedSource,
    IndistinguishableWords,
    NoFixedPoint,
)
from .sources import Source, DirichletValue, from_config, parse_source_token
from .simple import Memoryless, Markov, Periodicity, RatioProfile, classify_periodicity
from .dynamics import (
    DynamicalSource,
    rary_source,
    gauss_source,
    moebius_source,
    emit_word,
    check_good_class,
    GoodClassReport,
    uni_distance_exact,
    uni_probability_estimate,
    UniReport,
    diop_quantities,
    DiopQuantities,
    gauss_lambda_reference,
)
from .trees import build_trie, build_bst, BstNode, batch_costs
from .analysis import (
    KINDS,
    varpi,
    varpi_factor,
    alternating_mean,
    direct_means,
    rice_mean,
    RiceEstimate,
    exact_mean,
    ExactMeanResult,
    exact_mean_alternating,
    exact_mean_direct,
    rice_integral,
    AsymptoticFit,
    AsymptoticPrediction,
    main_term,
    asymptotic_fit,
    asymptotic_main_term,
    periodic_fluctuation,
    monte_carlo,
    MonteCarloEstimate,
)
from .operator import (
    discretize,
    dominant_eigenvalue,
    lambda_via_operator,
    entropy_via_operator,
    resolvent_norm_probe,
)
from .tameness import classify, TamenessReport, theorem2_regime, VERDICTS

__version__ = "0.1.0"

__all__ = [
    "TamelabError",
    "PrecisionExhausted",
    "TruncationBudget",
    "KernelUnderflow",
    "QuasiInversePole",
    "NotEntropic",
    "UnsupportedSource",
    "IndistinguishableWords",
    "NoFixedPoint",
    "Source",
    "DirichletValue",
    "from_config",
    "parse_source_token",
    "Memoryless",
    "Markov",
    "Periodicity",
    "RatioProfile",
    "classify_periodicity",
    "DynamicalSource",
    "rary_source",
    "gauss_source",
    "moebius_source",
    "emit_word",
    "check_good_class",
    "GoodClassReport",
    "uni_distance_exact",
    "uni_probability_estimate",
    "UniReport",
    "diop_quantities",
    "DiopQuantities",
    "gauss_lambda_reference",
    "build_trie",
    "build_bst",
    "BstNode",
    "batch_costs",
    "KINDS",
    "varpi",
    "varpi_factor",
    "alternating_mean",
    "direct_means",
    "rice_mean",
    "RiceEstimate",
    "exact_mean",
    "ExactMeanResult",
    "exact_mean_alternating",
    "exact_mean_direct",
    "rice_integral",
    "AsymptoticFit",
    "AsymptoticPrediction",
    "main_term",
    "asymptotic_fit",
    "asymptotic_main_term",
    "periodic_fluctuation",
    "monte_carlo",
    "MonteCarloEstimate",
    "discretize",
    "dominant_eigenvalue",
    "lambda_via_operator",
    "entropy_via_operator",
    "resolvent_norm_probe",
    "classify",
    "TamenessReport",
    "theorem2_regime",
    "VERDICTS",
    "__version__",
]
