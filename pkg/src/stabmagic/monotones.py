"""Magic monotones: stabilizer Renyi entropy, stabilizer fidelity and
robustness of magic (with a primal-dual certificate)."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .dictionary import StateDictionary, stabilizer_dictionary
from .errors import InvalidOperator, MixedStateError, SizeCapExceeded, SolverError
from .pauli import DensityMatrix, HermitianOperator, from_pauli_coordinates, pauli_coordinates, pauli_spectrum_pure

MAX_FIDELITY_QUBITS = 4
MAX_ROBUSTNESS_QUBITS = 4
SUPPORT_TOL = 1e-9
_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    m = np.asarray(rho)
    return DensityMatrix.from_vector(m) if m.ndim == 1 else DensityMatrix(m)


def stabilizer_renyi_entropy(psi, alpha: float) -> float:
    """``M_alpha(psi) = log2[(1/d) sum_P |tr(P psi)|^(2 alpha)] / (1 - alpha)``."""
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    rho = _as_density(psi)
    if not rho.is_pure():
        raise MixedStateError(
            "stabilizer Renyi entropy is defined for pure states only; the mixed-state "
            "convex-roof extension is not implemented"
        )
    v = rho.state_vector()
    d = v.shape[0]
    spec = np.abs(pauli_spectrum_pure(v)).ravel()
    s = np.sum(spec ** (2 * alpha)) / d
    return float(np.log2(s) / (1 - alpha))


def stabilizer_fidelity(rho) -> float:
    """Largest overlap ``<s|rho|s>`` with a pure stabilizer state.

    The maximum of ``||sqrt(sigma) rho sqrt(sigma)||_1`` over the polytope is
    attained at a vertex because the objective is linear in ``sigma`` there.
    """
    rho = _as_density(rho)
    if rho.n_qubits > MAX_FIDELITY_QUBITS:
        raise SizeCapExceeded(f"fidelity needs full enumeration, n <= {MAX_FIDELITY_QUBITS}")
    dic = stabilizer_dictionary(rho.n_qubits)
    return float(np.max(dic.expectations(rho.matrix)))


@dataclass(frozen=True)
class RobustnessCertificate:
    value: float
    primal_coefficients: dict
    dual_witness: HermitianOperator
    dictionary_tag: str
    dual_value: float
    gap: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .pauli import operator_to_dict

        return {
            "value": self.value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "dictionary": self.dictionary_tag,
            "support": {str(k): v for k, v in sorted(self.primal_coefficients.items())},
            "dual_witness": operator_to_dict(self.dual_witness.matrix),
            "diagnostics": self.diagnostics,
        }


def _l1_lp(a, b, weights=None, budget=None):
    # min w.|x| s.t. a x = b, optionally sum|x| <= budget; x = xp - xm
    n = a.shape[1]
    w = np.ones(n) if weights is None else weights
    c = np.concatenate([w, w])
    a_eq = np.hstack([a, -a])
    kw = {}
    if budget is not None:
        kw = {"A_ub": np.ones((1, 2 * n)), "b_ub": [budget]}
    res = linprog(c, A_eq=a_eq, b_eq=b, bounds=(0, None), method="highs", options=_HIGHS_OPTIONS, **kw)
    return res


def _refine_primal(a, b, x):
    # re-solve on the support to remove solver-level noise
    supp = np.flatnonzero(np.abs(x) > SUPPORT_TOL)
    sol, *_ = np.linalg.lstsq(a[:, supp], b, rcond=None)
    if np.all(np.sign(sol) == np.sign(x[supp])) and np.linalg.norm(a[:, supp] @ sol - b) < 1e-12:
        x = np.zeros_like(x)
        x[supp] = sol
    return x


def _robustness_lp(b, dic: StateDictionary, canonical=True, verbose=False) -> RobustnessCertificate:
    a = dic.coords.T
    res = _l1_lp(a, b)
    if res.status == 2:
        rank = np.linalg.matrix_rank(a)
        raise SolverError(
            f"equality system infeasible: dictionary {dic.tag} spans rank {rank} of {a.shape[0]}; "
            "the state is not in its span (net too coarse or input is not a state)"
        )
    if res.status != 0:
        raise SolverError(f"LP failed ({res.message}); condition number {np.linalg.cond(a):.3g}")
    n = a.shape[1]
    x = res.x[:n] - res.x[n:]
    value = float(res.fun)
    y = np.asarray(res.eqlin.marginals, dtype=float)
    if canonical:
        # among optimal solutions prefer the support with the smallest indices
        w = 1.0 + np.arange(n) / n
        res2 = _l1_lp(a, b, weights=w, budget=value * (1 + 1e-12) + 1e-12)
        if res2.status == 0:
            x = res2.x[:n] - res2.x[n:]
    x = _refine_primal(a, b, x)
    scale = max(1.0, float(np.max(np.abs(a.T @ y))))
    y = y / scale
    primal = float(np.sum(np.abs(x)))
    dual = float(b @ y)
    witness = from_pauli_coordinates(y, dic.n_qubits)
    coeffs = {int(i): float(x[i]) for i in np.flatnonzero(np.abs(x) > SUPPORT_TOL)}
    diag = {"solver": "highs", "residual": float(np.linalg.norm(a @ x - b))}
    if verbose:
        one = linprog(-b, A_ub=a.T, b_ub=np.ones(n), bounds=(None, None), method="highs")
        diag["one_sided_dual"] = "unbounded" if one.status == 3 else float(-one.fun)
        diag["two_sided_dual"] = dual
    if primal - dual > 1e-7:
        raise SolverError(f"duality gap {primal - dual:.3g} exceeds 1e-7 for {dic.tag}")
    return RobustnessCertificate(
        value=primal,
        primal_coefficients=coeffs,
        dual_witness=HermitianOperator(witness, tol=1e-8),
        dictionary_tag=dic.tag,
        dual_value=dual,
        gap=primal - dual,
        diagnostics=diag,
    )


def robustness_over(rho, dic: StateDictionary, canonical=True, verbose=False) -> RobustnessCertificate:
    """Robustness LP against an arbitrary pure-state dictionary."""
    rho = _as_density(rho)
    dic.check_dim(rho.matrix)
    return _robustness_lp(pauli_coordinates(rho.matrix), dic, canonical, verbose)


def robustness_of_magic(rho, canonical=True, verbose=False) -> RobustnessCertificate:
    """``min sum|x_i|`` subject to ``sum x_i sigma_i = rho`` over all stabilizer states."""
    rho = _as_density(rho)
    if rho.n_qubits > MAX_ROBUSTNESS_QUBITS:
        raise SizeCapExceeded(f"robustness needs the full dictionary, n <= {MAX_ROBUSTNESS_QUBITS}")
    return robustness_over(rho, stabilizer_dictionary(rho.n_qubits), canonical, verbose)


def t_extended_robustness(rho, t: int, net_eps: float, dictionary=None, verbose=False) -> RobustnessCertificate:
    """Robustness over the Clifford orbit of a packing net of ``t``-doped states."""
    from .doped import build_doped_dictionary

    rho = _as_density(rho)
    if t not in (0, 1, 2):
        raise InvalidOperator("t must be 0, 1 or 2")
    if t == 0:
        return robustness_of_magic(rho, verbose=verbose)
    dic = dictionary or build_doped_dictionary(rho.n_qubits, t, net_eps)
    return robustness_over(rho, dic, verbose=verbose)
