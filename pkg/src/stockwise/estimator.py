"""scikit-learn compatible front end.

``FractileOrderPlanner`` learns empirical demand tables from a history
matrix (one row per period, one column per product) and picks the order
quantities that maximise expected profit. ``predict`` returns the realized
profit of that plan for new demand rows and ``score`` their mean.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .constrained import solve_discrete_lattice
from .demand import fit_empirical
from .exceptions import DomainError, LengthMismatch, NegativeDemand
from .fractile import solve
from .profit import Catalog, Product, realized_profit_matrix


def _per_product(value, k: int, name: str) -> np.ndarray:
    try:
        return np.broadcast_to(np.asarray(value, dtype=float), (k,))
    except ValueError:
        raise LengthMismatch(f"{name} must be a scalar or have {k} entries") from None


def _check_history(X) -> np.ndarray:
    X = check_array(X, dtype="numeric", ensure_all_finite=True)
    if np.any(X < 0):
        raise NegativeDemand("demand history must be nonnegative")
    if np.any(X != np.round(X)):
        raise DomainError("demand history must hold integer counts")
    return X


class FractileOrderPlanner(BaseEstimator):
    """Choose order quantities from a demand history.

    Parameters
    ----------
    unit_profit : float or array-like of shape (n_products,)
        Profit per unit sold.
    unit_loss : float or array-like of shape (n_products,)
        Loss per unit ordered but not sold.
    constraint : LinearConstraint, optional
        Restriction on the plan; searched over the integer lattice up to
        ``max_order`` units per product.
    max_order : int, optional
        Per-product lattice bound for constrained fits. Defaults to the
        largest observed demand.
    """

    def __init__(self, unit_profit=1.0, unit_loss=1.0, constraint=None, max_order=None):
        self.unit_profit = unit_profit
        self.unit_loss = unit_loss
        self.constraint = constraint
        self.max_order = max_order

    def fit(self, X, y=None):
        names = getattr(X, "columns", None)
        X = _check_history(X)
        k = X.shape[1]
        c = _per_product(self.unit_profit, k, "unit_profit")
        s = _per_product(self.unit_loss, k, "unit_loss")
        if names is not None:
            self.feature_names_in_ = np.asarray([str(n) for n in names], dtype=object)
            labels = list(self.feature_names_in_)
        else:
            labels = [f"product_{i}" for i in range(k)]
        self.n_features_in_ = k
        self.catalog_ = Catalog(
            tuple(
                (Product(labels[i], float(c[i]), float(s[i])), fit_empirical(X[:, i].astype(int)))
                for i in range(k)
            )
        )
        if self.constraint is None:
            self.report_ = solve(self.catalog_)
            plan = self.report_.plan
        else:
            bound = int(X.max()) if self.max_order is None else int(self.max_order)
            result = solve_discrete_lattice(self.catalog_, self.constraint, [bound] * k)
            self.report_ = result
            plan = result.plan
        self.order_quantities_ = np.asarray(plan.quantities, dtype=int)
        return self

    def predict(self, X) -> np.ndarray:
        """Realized profit of the fitted plan for each demand row."""
        check_is_fitted(self, "order_quantities_")
        X = _check_history(X)
        if X.shape[1] != self.n_features_in_:
            raise LengthMismatch(
                f"X has {X.shape[1]} columns, the planner was fitted with {self.n_features_in_}"
            )
        return realized_profit_matrix(self.catalog_, self.order_quantities_.tolist(), X)

    def score(self, X, y=None) -> float:
        """Mean realized profit on ``X`` (higher is better)."""
        return float(np.mean(self.predict(X)))

