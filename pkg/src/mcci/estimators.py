"""scikit-learn style front ends for the shift confidence intervals.

>>> from mcci import OneSampleShiftCI, load_darwin
>>> est = OneSampleShiftCI(alpha=0.05, n_replicates=2000, seed="doc").fit(load_darwin().x)
>>> est.lower_ < 24.0 < est.upper_
True
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .confidence import freeze, pvalue_function, shift_interval
from .shift_models import OneSampleData, TwoSampleData
from ._validation import check_alpha, check_count, check_positive


class _ShiftCI(BaseEstimator):
    """Shared fit logic; subclasses turn ``(X, y)`` into model data."""

    def _make_data(self, X, y):
        raise NotImplementedError

    def _validate_params(self):
        check_alpha(self.alpha)
        check_count(self.n_replicates, "n_replicates", minimum=0)
        check_positive(self.tol, "tol")

    def fit(self, X, y=None):
        """Freeze the Monte Carlo draws and invert the test.

        Sets ``data_``, ``draws_``, ``result_``, ``lower_`` and ``upper_``.
        """
        self._validate_params()
        self.data_ = self._make_data(X, y)
        self.draws_ = freeze(self.data_, self.n_replicates, self.seed, self.generator,
                             self.threads, keep_assignments=self._statistic() == "studentized")
        self.result_ = shift_interval(
            self.data_, self.alpha, tol=self.tol, side=self.side, convention=self.convention,
            statistic=self._statistic(), max_doublings=self.max_doublings, draws=self.draws_,
        )
        self.lower_, self.upper_ = self.result_.lower, self.result_.upper
        return self

    def _statistic(self) -> str:
        return getattr(self, "statistic", "difference")

    @property
    def interval_(self) -> tuple[float, float]:
        check_is_fitted(self, "result_")
        return self.lower_, self.upper_

    def pvalue(self, eta, side: str | None = None):
        """P-value of the hypothesis "shift = eta" on the fitted draws.

        Accepts a scalar or an array of shifts.
        """
        check_is_fitted(self, "draws_")
        p = pvalue_function(self.data_, self.draws_, side or self.side, self.convention,
                            self._statistic())
        if np.ndim(eta) == 0:
            return p(eta)
        return p.grid(eta).reshape(np.shape(eta))


class OneSampleShiftCI(_ShiftCI):
    """Confidence interval for the center of a symmetric distribution.

    Parameters
    ----------
    alpha : float, default=0.05
        Significance level; the interval covers with probability at least
        ``1 - alpha``.
    n_replicates : int, default=10000
        Number of random sign-flip replicates.
    seed : str, bytes or int, default=0
        Seed of the Monte Carlo generator.
    tol : float, default=1e-8
        Endpoints are conservative to within ``tol``.
    side : {"two-sided", "lower", "upper"}, default="two-sided"
    convention : {"bonferroni", "abs"}, default="bonferroni"
    generator : {"sha256", "pcg64"}, default="sha256"
    max_doublings : int, default=60
    threads : int, optional
        Worker threads for drawing replicates; results do not depend on it.
    """

    def __init__(self, alpha=0.05, n_replicates=10_000, seed=0, tol=1e-8, side="two-sided",
                 convention="bonferroni", generator="sha256", max_doublings=60, threads=None):
        self.alpha = alpha
        self.n_replicates = n_replicates
        self.seed = seed
        self.tol = tol
        self.side = side
        self.convention = convention
        self.generator = generator
        self.max_doublings = max_doublings
        self.threads = threads

    def _make_data(self, X, y):
        if y is not None:
            raise ValueError("OneSampleShiftCI.fit takes no y")
        return OneSampleData(X)


class TwoSampleShiftCI(_ShiftCI):
    """Confidence interval for a constant additive treatment effect.

    ``fit(X, y)`` takes responses ``X`` and two-level group labels ``y``.  The
    treated group is ``treatment_label`` or, if that is None, the first label
    that appears.  Parameters are as for :class:`OneSampleShiftCI`, plus
    ``statistic`` (``"difference"`` in means, or ``"studentized"``).
    """

    def __init__(self, alpha=0.05, n_replicates=10_000, seed=0, tol=1e-8, side="two-sided",
                 convention="bonferroni", generator="sha256", statistic="difference",
                 treatment_label=None, max_doublings=60, threads=None):
        self.alpha = alpha
        self.n_replicates = n_replicates
        self.seed = seed
        self.tol = tol
        self.side = side
        self.convention = convention
        self.generator = generator
        self.statistic = statistic
        self.treatment_label = treatment_label
        self.max_doublings = max_doublings
        self.threads = threads

    def _make_data(self, X, y):
        if isinstance(X, TwoSampleData):
            return X
        if y is None:
            raise ValueError("TwoSampleShiftCI.fit needs group labels y")
        values = np.asarray(X, dtype=np.float64)
        if values.ndim == 2 and values.shape[1] == 1:
            values = values[:, 0]
        return TwoSampleData.from_groups(values, y, self.treatment_label)
