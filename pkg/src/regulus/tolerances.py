"""Tolerance policy shared by every check in the package."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical budgets separating exact formulas from sampled-data checks.

    Parameters
    ----------
    rel : float
        Relative tolerance for closed-form identities and norm comparisons.
    geo_scale : float
        Multiplier in the sampled-data budget ``geo_scale * h / r`` where
        ``h`` is the boundary sampling step.  Discrete curve and pair checks
        cannot resolve features below this scale.
    geo_abs : float or None
        Absolute override for the sampled-data budget.  When set,
        :meth:`eps_geo` returns it unchanged.
    lip_slack : float
        Slack over 1.0 allowed for the normal-field stretch estimate.  The
        discrete estimate approaches the true constant from below with an
        O(h^2) gap on smooth data, so this stays far below ``eps_geo``.
    """

    rel: float = 1e-9
    geo_scale: float = 2.0
    geo_abs: float | None = None
    lip_slack: float = 1e-6

    def eps_geo(self, h: float, r: float) -> float:
        """Dimensionless discretization budget for step ``h`` at scale ``r``."""
        if self.geo_abs is not None:
            return self.geo_abs
        return self.geo_scale * h / r


DEFAULT_TOL = Tolerances()
