"""scikit-learn style wrappers around the conversion and resonance solvers.

The estimators hold only hyper-parameters in ``__init__`` so that
``get_params``, ``set_params`` and ``clone`` behave as usual; everything
computed by ``fit`` ends in an underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .atoms import iid_power
from .dist import ProbVec, ResourceTheory, irreversibility_parameter
from .experiments import lambda_sweep
from .majorization import optimal_final_state
from .resonance import ResonanceQuery, mixture_nu, resonant_lambda


def check_distribution(x, gibbs=None, name="distribution") -> ProbVec:
    """Validate an array-like probability vector (with optional Gibbs weights)."""
    if isinstance(x, ProbVec):
        return x if gibbs is None else x.with_gibbs(gibbs)
    arr = check_array(x, ensure_2d=False, dtype=float, input_name=name).ravel()
    if gibbs is not None:
        gibbs = check_array(gibbs, ensure_2d=False, dtype=float, input_name="gibbs").ravel()
    return ProbVec(arr, gibbs)


class OptimalConverter(BaseEstimator):
    """Optimal approximate conversion of ``initial^n_initial`` into ``target^n_target``.

    Parameters
    ----------
    theory : str
        ``"thermodynamic"``, ``"entanglement"`` or ``"coherence"``.
    n_initial, n_target : int
        Copies of the initial and target distributions.
    verify : bool
        Re-check the constructed optimum (see ``optimal_final_state``).

    Attributes
    ----------
    result_ : ConversionResult
    fidelity_, infidelity_ : float
    feasible_exact_ : bool
    """

    def __init__(self, theory="thermodynamic", n_initial=1, n_target=1, verify=True):
        self.theory = theory
        self.n_initial = n_initial
        self.n_target = n_target
        self.verify = verify

    def fit(self, X, y, gibbs=None):
        """``X`` is the initial distribution and ``y`` the target."""
        theory = ResourceTheory.coerce(self.theory)
        p = check_distribution(X, gibbs, "X")
        q = check_distribution(y, gibbs, "y")
        res = optimal_final_state(
            iid_power(p, self.n_initial), iid_power(q, self.n_target), theory, verify=self.verify
        )
        self.result_ = res
        self.final_ = res.final
        self.fidelity_ = res.fidelity
        self.infidelity_ = res.infidelity
        self.feasible_exact_ = res.feasible_exact
        return self

    def score(self, X=None, y=None):
        """Achieved fidelity of the fitted conversion."""
        check_is_fitted(self, "result_")
        return self.fidelity_


class ResonanceTuner(BaseEstimator):
    """Locate the resonant mixing factor of two initial species for a target.

    ``fit(p1, p2, q)`` stores the analytic ``lambda_`` (or ``None``).  With
    ``n`` set, it also scans the admissible ``lambda`` values ``k / n`` and
    stores the measured infidelities and their minimiser ``best_lambda_``.
    """

    def __init__(self, theory="entanglement", n=None):
        self.theory = theory
        self.n = n

    def fit(self, p1, p2, q):
        theory = ResourceTheory.coerce(self.theory)
        rq = ResonanceQuery(
            check_distribution(p1, name="p1"),
            check_distribution(p2, name="p2"),
            check_distribution(q, name="q"),
            theory,
        )
        self.query_ = rq
        self.lambda_ = resonant_lambda(rq)
        self.nu_ = (
            irreversibility_parameter(rq.p1, rq.q, theory),
            irreversibility_parameter(rq.p2, rq.q, theory),
        )
        if self.n is not None:
            n = int(self.n)
            lams = np.arange(n + 1) / n
            grid = lambda_sweep(rq.p1, rq.p2, rq.q, [n], lams, theory)
            self.lambdas_ = lams
            self.infidelities_ = grid.values[0]
            self.best_lambda_ = float(lams[int(np.nanargmin(self.infidelities_))])
        return self

    def nu_at(self, lam):
        """Irreversibility parameter of the ``lam``-mixture."""
        check_is_fitted(self, "query_")
        return mixture_nu(self.query_, lam)
