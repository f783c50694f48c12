"""Weak membership for convex hulls of pure states: exact Euclidean
projection, separating witnesses and weak-witness-decision scans."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .dictionary import StateDictionary, stabilizer_dictionary
from .errors import InvalidOperator, PromiseError, SizeCapExceeded, SolverError
from .pauli import DensityMatrix, HermitianOperator, pauli_coordinates, schatten_norm

WOLFE_GAP = 1e-10
MAX_ITER = 10**6
ZERO_DISTANCE = 1e-8
MAX_PROJECTION_QUBITS = 3


class Decision(str, Enum):
    YES = "YES"
    NO = "NO"
    PROMISE_VIOLATED = "PROMISE_VIOLATED"


def _affine_minimizer(q):
    # argmin ||q^T a|| subject to sum(a) = 1
    k = q.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = q @ q.T
    kkt[:k, k] = kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(points, gap_tol=WOLFE_GAP, max_iter=MAX_ITER):
    """Wolfe's algorithm for the point of ``conv(points)`` nearest the origin.

    Returns ``(x, weights, gap)`` where ``weights`` is a dense vector on the
    simplex and ``gap = |x|^2 - min_j <x, p_j>`` is the final duality gap.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[0] == 0:
        raise InvalidOperator("empty dictionary")
    scale = max(1.0, float(np.max(np.sum(p * p, axis=1))))
    act = [int(np.argmin(np.sum(p * p, axis=1)))]
    lam = np.array([1.0])
    x = p[act[0]].copy()
    gap = np.inf
    for _ in range(max_iter):
        g = p @ x
        j = int(np.argmin(g))
        gap = float(x @ x - g[j])
        if gap <= gap_tol * scale or j in act:
            break
        act.append(j)
        lam = np.append(lam, 0.0)
        while True:
            alpha = _affine_minimizer(p[act])
            if np.all(alpha > 1e-14):
                lam = alpha
                break
            neg = alpha <= 1e-14
            theta = np.min(lam[neg] / (lam[neg] - alpha[neg]))
            lam = lam + theta * (alpha - lam)
            keep = lam > 1e-14
            if not keep.any():
                keep[np.argmax(lam)] = True
            act = [a for a, k in zip(act, keep) if k]
            lam = lam[keep] / lam[keep].sum()
        x = lam @ p[act]
    else:
        raise SolverError(f"projection did not converge in {max_iter} iterations (gap {gap:.3g})")
    if gap > 1e3 * gap_tol * scale:
        raise SolverError(f"projection stalled with duality gap {gap:.3g}")
    weights = np.zeros(p.shape[0])
    weights[act] = lam
    return x, weights, max(gap, 0.0)


@dataclass
class MembershipVerdict:
    distance: float
    projection: DensityMatrix
    weights: dict
    wolfe_gap: float
    dictionary_tag: str
    decision: Decision = None
    eps: float = None
    depth: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .pauli import operator_to_dict

        return {
            "decision": None if self.decision is None else self.decision.value,
            "eps": self.eps,
            "distance": self.distance,
            "wolfe_gap": self.wolfe_gap,
            "dictionary": self.dictionary_tag,
            "weights": {str(k): v for k, v in sorted(self.weights.items())},
            "projection": operator_to_dict(self.projection.matrix),
            "depth": self.depth,
        }


def _default_dictionary(rho, dictionary):
    if dictionary is not None:
        dictionary.check_dim(np.asarray(rho))
        return dictionary
    n = DensityMatrix(np.asarray(rho)).n_qubits
    if n > MAX_PROJECTION_QUBITS:
        raise SizeCapExceeded(f"stabilizer projection is limited to n <= {MAX_PROJECTION_QUBITS}")
    return stabilizer_dictionary(n)


def project_onto_polytope(rho, dictionary: StateDictionary = None) -> MembershipVerdict:
    """Closest point of the dictionary hull to ``rho`` in Frobenius norm."""
    m = np.asarray(rho, dtype=complex)
    dic = _default_dictionary(m, dictionary)
    b = pauli_coordinates(m)
    _, w, gap = min_norm_point(dic.coords - b)
    supp = np.flatnonzero(w > 0)
    v = dic.vectors[supp]
    tau = np.einsum("k,ki,kj->ij", w[supp], v, v.conj())
    tau = (tau + tau.conj().T) / 2
    tau /= np.trace(tau).real
    return MembershipVerdict(
        distance=schatten_norm(m - tau, 2),
        projection=DensityMatrix(tau, tol=1e-9),
        weights={int(i): float(w[i]) for i in supp},
        wolfe_gap=gap,
        dictionary_tag=dic.tag,
    )


def facet_depth(rho, dictionary: StateDictionary) -> float:
    """Exact inner depth from the facets of the hull (single-qubit dictionaries).

    Distance from ``rho`` to the boundary within the trace-one hyperplane;
    negative outside.
    """
    from scipy.spatial import ConvexHull

    if dictionary.dim != 2:
        raise SizeCapExceeded("exact facet enumeration is only used for one qubit")
    pts = dictionary.coords[:, 1:]
    hull = ConvexHull(pts)
    b = pauli_coordinates(np.asarray(rho))[1:]
    # qhull stores outward normals with offsets: n.x + c <= 0 inside
    return float(np.min(-(hull.equations[:, :-1] @ b + hull.equations[:, -1])))


def axis_depth(rho, dictionary: StateDictionary) -> tuple[float, float]:
    """Lower and upper bounds on the inner depth from axis-aligned LPs.

    Along each of the ``2(d^2-1)`` signed traceless Pauli axes the largest
    step ``s`` that keeps ``rho`` in the hull is computed. The minimum step
    ``r`` bounds the depth above, and the cross-polytope with half-axes
    ``r`` contains a ball of radius ``r / sqrt(d^2-1)``.
    """
    a = dictionary.coords.T
    b = pauli_coordinates(np.asarray(rho))
    k, n = a.shape
    steps = []
    for axis in range(1, k):
        for sign in (1.0, -1.0):
            e = np.zeros(k)
            e[axis] = sign
            # maximise s with a lam - s e = b, lam >= 0
            c = np.zeros(n + 1)
            c[-1] = -1.0
            res = linprog(c, A_eq=np.hstack([a, -e[:, None]]), b_eq=b, bounds=(0, None), method="highs")
            if res.status != 0:
                return 0.0, 0.0
            steps.append(-res.fun)
    r = float(min(steps))
    return r / np.sqrt(k - 1), r


def _depth_info(rho, dic, eps):
    if dic.dim == 2:
        depth = facet_depth(rho, dic)
        return {"method": "facets", "lower": depth, "upper": depth, "ball_certified": bool(depth >= eps)}
    lo, hi = axis_depth(rho, dic)
    return {"method": "axis-lp", "lower": float(lo), "upper": float(hi), "ball_certified": bool(lo >= eps)}


def decide_wmem(rho, eps: float, dictionary: StateDictionary = None, depth=True) -> MembershipVerdict:
    """Weak membership with promise gap ``eps``.

    Points of the hull answer YES; the inner depth is reported in
    ``verdict.depth`` (``ball_certified`` tells whether the full
    eps-ball is contained). Points farther than ``eps`` answer NO and the
    rest violate the promise.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = np.asarray(rho, dtype=complex)
    dic = _default_dictionary(m, dictionary)
    verdict = project_onto_polytope(m, dic)
    verdict.eps = eps
    if verdict.distance <= ZERO_DISTANCE:
        verdict.decision = Decision.YES
        if depth:
            verdict.depth = _depth_info(m, dic, eps)
    elif verdict.distance > eps:
        verdict.decision = Decision.NO
    else:
        verdict.decision = Decision.PROMISE_VIOLATED
    return verdict


@dataclass(frozen=True)
class WitnessReport:
    witness: HermitianOperator
    margin: float
    gamma: float
    distance: float

    def to_dict(self) -> dict:
        from .pauli import operator_to_dict

        return {
            "gamma": self.gamma,
            "margin": self.margin,
            "distance": self.distance,
            "witness": operator_to_dict(self.witness.matrix),
        }


def extract_witness(rho, verdict: MembershipVerdict = None, dictionary: StateDictionary = None) -> WitnessReport:
    """Separating operator ``W = rho - tau`` with ``gamma = max_sigma tr(W sigma)``."""
    m = np.asarray(rho, dtype=complex)
    dic = _default_dictionary(m, dictionary)
    if verdict is None:
        verdict = project_onto_polytope(m, dic)
    if verdict.distance <= ZERO_DISTANCE:
        raise PromiseError("state lies in the hull; no separating witness exists")
    w = m - verdict.projection.matrix
    gamma = float(np.max(dic.expectations(w)))
    margin = float(np.real(np.trace(w @ m))) - gamma
    return WitnessReport(HermitianOperator(w, tol=1e-9), margin, gamma, verdict.distance)


@dataclass
class WWDResult:
    decision: Decision
    max_value: float
    gamma: float
    delta: float
    scan: str
    scanned: int
    certified: bool
    argmax: int
    argmax_vector: np.ndarray

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "max_value": self.max_value,
            "gamma": self.gamma,
            "delta": self.delta,
            "scan": self.scan,
            "scanned": self.scanned,
            "certified": self.certified,
            "argmax": self.argmax,
            "argmax_vector": {
                "real": self.argmax_vector.real.tolist(),
                "imag": self.argmax_vector.imag.tolist(),
            },
        }


SCAN_FAMILIES = {
    "exhaustive": "ALL_STABILIZER",
    "graphs": "GRAPH",
    "doubled": "DOUBLED_GRAPH",
    "coherent": "MAX_COHERENT",
    "overlap": "OVERLAP_T",
}
MAX_EXHAUSTIVE = 5 * 10**7


def check_wwd_instance(w, gamma: float, delta: float, scan="exhaustive", rng=None, jobs=1, max_states=MAX_EXHAUSTIVE) -> WWDResult:
    """Weak witness decision: compare ``max_sigma tr(W sigma)`` with ``gamma +- delta``.

    ``scan`` is a :class:`StateDictionary`, one of ``exhaustive``, ``graphs``,
    ``doubled``, ``coherent``, ``overlap``, or ``sample:N`` / ``<family>:N``
    for ``N`` uniform samples. Sampled scans certify YES answers only.
    """
    from .scan import scan_dictionary, scan_family, scan_samples
    from .stabilizer import StateFamily

    op = HermitianOperator(w, tol=1e-9)
    norm = schatten_norm(op.matrix, 2)
    if norm > 1 + 1e-9:
        raise PromiseError(f"witness has Frobenius norm {norm:.6g} > 1")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    n = op.n_qubits
    sampled = False
    if isinstance(scan, StateDictionary):
        scan.check_dim(op.matrix)
        res, label = scan_dictionary(op.matrix, scan), scan.tag
    elif ":" in scan:
        fam, count = scan.split(":", 1)
        fam = "exhaustive" if fam == "sample" else fam
        if fam not in SCAN_FAMILIES:
            raise ValueError(f"unknown scan family {fam!r}")
        rng = rng if rng is not None else np.random.default_rng()
        res = scan_samples(op.matrix, n, int(float(count)), rng, SCAN_FAMILIES[fam])
        label, sampled = scan, True
    else:
        if scan not in SCAN_FAMILIES:
            raise ValueError(f"unknown scan mode {scan!r}")
        family = StateFamily(SCAN_FAMILIES[scan], n)
        if family.size > max_states:
            raise SizeCapExceeded(
                f"{scan} scan has {family.size} states (cap {max_states}); use a sampled scan"
            )
        res, label = scan_family(op.matrix, family, jobs=jobs), scan
    m = res.max_value
    if m >= gamma + delta:
        decision = Decision.YES
    elif m <= gamma - delta:
        decision = Decision.NO
    else:
        decision = Decision.PROMISE_VIOLATED
    return WWDResult(
        decision=decision,
        max_value=m,
        gamma=gamma,
        delta=delta,
        scan=label,
        scanned=res.count,
        certified=not sampled or decision is Decision.YES,
        argmax=res.argmax,
        argmax_vector=res.max_vector,
    )
