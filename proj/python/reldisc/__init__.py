"""Related-discussion detection toolkit (Python bindings)."""

from ._core import (
    Error,
    IoError,
    Label,
    ProviderError,
    SimilarityRecord,
    ThresholdStats,
    ValidationError,
    __version__,
    build_s,
    cohen_kappa,
    compute_threshold,
    cosine,
    evaluate,
    format_percent,
    hash_embed,
    lemmatize,
    local_threshold,
    mean_precision,
    normalize,
    pairwise_hash,
    percentile,
    prepare_text,
    run,
    strip_code_and_urls,
    strip_noise,
    top_k,
    validate_report,
)
