"""scikit-learn style front-ends for the two anonymizers.

``fit`` learns what is derived once from the original log (the activity
alphabet and, for the semantics-aware variant, the behavioural rules).
``transform`` answers the private trace-variant query on a log and returns a
:class:`~tracedp.event_log.VariantDistribution`.

>>> from tracedp import SaCoFa
>>> est = SaCoFa(epsilon=1.0, k=5, p=2, random_state=7)
>>> dist = est.fit_transform([["a", "b"], ["a", "b"], ["a"]])
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .baseline import anonymize_laplace
from .event_log import VariantDistribution, variant_query
from .rules import ScoreFunction, derive_rules
from .sacofa import AnonymizationConfig, anonymize
from .validation import check_epsilon, check_k, check_log, check_pruning, check_seed


class SaCoFa(TransformerMixin, BaseEstimator):
    """Semantics-aware anonymizer.

    Parameters
    ----------
    epsilon : float
        Privacy parameter passed to every mechanism invocation.
    k : int
        Maximum variant length.
    p : int, optional
        Uniform pruning threshold. Mutually exclusive with the two below.
    p_harmless, p_harmful : int or inf, optional
        Per-class pruning thresholds.
    score : {"binary", "continuous"}
    cap : int
        Violation cap of the continuous score, which is also its sensitivity.
    random_state : int, optional
        Seed; drawn from OS entropy on each ``transform`` when omitted.

    Attributes
    ----------
    rules_ : RuleSet
    activities_ : list of str
    report_ : RunReport
        Diagnostics of the last ``transform``.
    seed_ : int
        Effective seed of the last ``transform``.
    """

    def __init__(
        self,
        epsilon=1.0,
        k=10,
        p=None,
        p_harmless=None,
        p_harmful=None,
        score="binary",
        cap=3,
        random_state=None,
    ):
        self.epsilon = epsilon
        self.k = k
        self.p = p
        self.p_harmless = p_harmless
        self.p_harmful = p_harmful
        self.score = score
        self.cap = cap
        self.random_state = random_state

    def _config(self) -> AnonymizationConfig:
        return AnonymizationConfig(
            epsilon=check_epsilon(self.epsilon),
            k=check_k(self.k),
            pruning=check_pruning(self.p, self.p_harmless, self.p_harmful),
            score_fn=ScoreFunction(self.score, self.cap),
            seed=check_seed(self.random_state),
        )

    def fit(self, X, y=None):
        self._config()
        log = check_log(X)
        self.rules_ = derive_rules(log)
        self.activities_ = sorted(self.rules_.universe)
        self.n_traces_ = len(log)
        return self

    def transform(self, X) -> VariantDistribution:
        check_is_fitted(self, "rules_")
        dist, report = anonymize(check_log(X), self._config(), rules=self.rules_)
        self.report_ = report
        self.seed_ = report.seed
        return dist


class LaplaceTreeAnonymizer(TransformerMixin, BaseEstimator):
    """Laplacian prefix-tree baseline with uniform pruning.

    Parameters mirror :class:`SaCoFa` without the scoring options.
    """

    def __init__(self, epsilon=1.0, k=10, p=1, random_state=None):
        self.epsilon = epsilon
        self.k = k
        self.p = p
        self.random_state = random_state

    def fit(self, X, y=None):
        check_pruning(self.p)
        log = check_log(X)
        self.activities_ = sorted(log.activity_universe)
        self.n_traces_ = len(log)
        return self

    def transform(self, X) -> VariantDistribution:
        check_is_fitted(self, "activities_")
        log = check_log(X)
        unknown = log.activity_universe - set(self.activities_)
        if unknown:
            raise ValueError(f"activities not seen during fit: {sorted(unknown)}")
        dist, report = anonymize_laplace(
            log,
            check_epsilon(self.epsilon),
            check_k(self.k),
            check_pruning(self.p).p,
            check_seed(self.random_state),
            activities=self.activities_,
        )
        self.report_ = report
        self.seed_ = report.seed
        return dist


class VariantQuery(TransformerMixin, BaseEstimator):
    """Exact, non-private trace-variant query, for pipelines and reference runs."""

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> VariantDistribution:
        return variant_query(check_log(X))
