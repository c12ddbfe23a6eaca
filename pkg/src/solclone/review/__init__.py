"""Human validation of sampled pairs: sessions, verdicts, agreement, metrics."""

from .core import (  # noqa: F401
    LABEL_TAXONOMY,
    AgreementReport,
    Judgment,
    JudgmentError,
    MetricsReport,
    Resolution,
    ReviewStore,
    Session,
    SessionPair,
    Verdict,
    cohen_kappa,
    confusion_metrics,
    kappa_from_counts,
    label_cooccurrence,
    stripe_report,
)
