from ddos_analysis.cauchy.truncated import (
    TruncatedCauchy,
    ccdf,
    cdf,
    check_parameters,
    compare_empirical,
    derive_attack,
    fit,
    mean,
    pdf,
    quantile,
    sample,
)

__all__ = [
    "TruncatedCauchy",
    "ccdf",
    "cdf",
    "check_parameters",
    "compare_empirical",
    "derive_attack",
    "fit",
    "mean",
    "pdf",
    "quantile",
    "sample",
]
