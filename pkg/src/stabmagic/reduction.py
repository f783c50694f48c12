"""Compile 3-SAT into stage Hamiltonians on two copies of an n-vertex graph
register and into a weak-witness-detection instance, then check each stage
by enumeration.

Layout: the 2n-qubit register is copy A (qubits 0..n-1) followed by copy B
(qubits n..2n-1); ``d = 2^n`` is the single-copy dimension. Variable ``k``
(1-based) lives on the ``k``-th vertex pair in lexicographic order, and the
graph encodes the assignment ``x_k = 1 - A_{e(k)}``.
"""

import base64
import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field
from math import comb, log2

import numpy as np

from . import __version__
from .errors import CNFError, DimensionMismatch, InvalidOperator, SizeCapExceeded
from .pauli import HermitianOperator, schatten_norm
from .stabilizer import StateFamily, edge_list

MAX_BUILD_QUBITS = 8
MAX_VERIFY_QUBITS = 6
STAGES = ("H_2COPY", "H1_GRAPHS", "H2_COHERENT", "H3_OVERLAP", "H4_STAB")


# --- instances --------------------------------------------------------------


@dataclass(frozen=True)
class SatInstance:
    """3-CNF formula; literals are ``(var, negated)`` with 1-based variables."""

    num_vars: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple((int(v), bool(neg)) for v, neg in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.num_vars < 0:
            raise CNFError("negative variable count", code="BAD_HEADER")
        for c in clauses:
            if len(c) != 3:
                raise CNFError(f"clause {c} does not have exactly 3 literals", code="WRONG_WIDTH")
            vs = [v for v, _ in c]
            if any(v < 1 or v > self.num_vars for v in vs):
                raise CNFError(f"clause {c} has a variable outside 1..{self.num_vars}", code="LITERAL_RANGE")
            if len(set(vs)) != 3:
                raise CNFError(f"clause {c} repeats a variable", code="DUPLICATE_VARIABLE")

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(str(-v if neg else v) for v, neg in c) + " 0")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"num_vars": self.num_vars, "clauses": [[-v if n else v for v, n in c] for c in self.clauses]}

    @classmethod
    def from_dict(cls, data) -> "SatInstance":
        return cls(data["num_vars"], [[(abs(l), l < 0) for l in c] for c in data["clauses"]])


def parse_cnf(text: str) -> SatInstance:
    """Parse DIMACS CNF where every clause has width three."""
    header = None
    tokens = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            m = re.fullmatch(r"p\s+cnf\s+(\d+)\s+(\d+)", line)
            if m is None or header is not None:
                raise CNFError(f"malformed header {line!r}", code="BAD_HEADER")
            header = (int(m.group(1)), int(m.group(2)))
            continue
        if header is None:
            raise CNFError("clause before the 'p cnf' header", code="BAD_HEADER")
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError:
            raise CNFError(f"non-integer token in {line!r}", code="BAD_TOKEN") from None
    if header is None:
        raise CNFError("missing 'p cnf' header", code="BAD_HEADER")
    nv, nc = header
    clauses, cur = [], []
    for t in tokens:
        if t == 0:
            if len(cur) != 3:
                raise CNFError(f"clause {cur} has width {len(cur)}, expected 3", code="WRONG_WIDTH")
            clauses.append(cur)
            cur = []
        else:
            if abs(t) > nv:
                raise CNFError(f"literal {t} out of range 1..{nv}", code="LITERAL_RANGE")
            cur.append((abs(t), t < 0))
    if cur:
        raise CNFError("last clause is not terminated by 0", code="WRONG_WIDTH")
    if len(clauses) != nc:
        raise CNFError(f"header announces {nc} clauses, found {len(clauses)}", code="CLAUSE_COUNT")
    return SatInstance(nv, clauses)


def clause_energy(instance: SatInstance, assignment) -> int:
    """Number of clauses violated by ``assignment`` (bit ``k-1`` is variable ``k``)."""
    x = [int(b) for b in assignment]
    if len(x) != instance.num_vars:
        raise DimensionMismatch(f"assignment has {len(x)} bits, instance {instance.num_vars} variables")
    total = 0
    for c in instance.clauses:
        # factor x xor s with s = 1 for positive literals is 1 iff the literal is false
        total += int(all((x[v - 1] ^ (0 if neg else 1)) for v, neg in c))
    return total


def brute_force_sat(instance: SatInstance):
    """Smallest violated-clause count and a minimising assignment."""
    best = None
    for bits in itertools.product((0, 1), repeat=instance.num_vars):
        e = clause_energy(instance, bits)
        if best is None or e < best[0]:
            best = (e, bits)
            if e == 0:
                break
    return best


def min_vertices(num_vars: int) -> int:
    n = 2
    while comb(n, 2) < num_vars:
        n += 1
    return n


def assignment_from_mask(mask: int, n_vertices: int, num_vars: int):
    return tuple(1 - ((mask >> k) & 1) for k in range(num_vars))


def mask_from_assignment(assignment, n_vertices: int) -> int:
    # unused edges stay absent
    return sum((1 - int(b)) << k for k, b in enumerate(assignment))


# --- operators ------------------------------------------------------------------


def _basis_index(ones, n):
    return sum(1 << (n - 1 - q) for q in ones)


def _sparse_vec(n, entries):
    v = np.zeros(1 << n)
    for idx, c in entries:
        v[idx] += c
    return v


def pair_vector(n, pair, s):
    """``|0> + (-1)^s |i,j>`` on ``n`` qubits."""
    return _sparse_vec(n, [(0, 1.0), (_basis_index(pair, n), (-1.0) ** s)])


def x_operator(n, pair, s):
    """``X^s(i,j) = d/4 (|0> + (-1)^s|ij>)(h.c.)``."""
    v = pair_vector(n, pair, s)
    return (1 << n) / 4 * np.outer(v, v)


def y_operator(n, pair1, s1, pair2, s2):
    """``Y^{s,s'}(i,j,k,l) = d/4 (|0> + (-1)^s|ij>)(<0| + (-1)^s'<kl|)``."""
    return (1 << n) / 4 * np.outer(pair_vector(n, pair1, s1), pair_vector(n, pair2, s2))


def _projector_penalty(m, ones):
    # d^2/4 (|0> - |ones>)(h.c.) on the m-qubit register
    v = _sparse_vec(m, [(0, 1.0), (_basis_index(ones, m), -1.0)])
    return (1 << m) / 4 * np.outer(v, v)


def xbar_operator(n, i, j):
    """Cross-copy edge penalty on vertex ``i`` of copy A and ``j`` of copy B."""
    return _projector_penalty(2 * n, (i, n + j))


def w_operator(n, i, j, k, l):
    """Penalty for ``A_{i_A j_A} != A_{k_B l_B}`` (weight-4 basis state)."""
    return _projector_penalty(2 * n, (i, j, n + k, n + l))


def s_operator(m, i):
    """Local phase penalty ``d^2/4 (|0> - |e_i>)(h.c.)`` on the 2n-qubit register."""
    return _projector_penalty(m, (i,))


def build_clause_hamiltonian(instance: SatInstance, vertices: int) -> HermitianOperator:
    """``H = sum_clauses X^{s1}_a (x) (Y^{s2,s3}_{bc} + h.c.)/2`` on two copies."""
    n = vertices
    edges = edge_list(n)
    if len(edges) < instance.num_vars:
        raise SizeCapExceeded(
            f"{n} vertices give {len(edges)} edges, fewer than {instance.num_vars} variables",
            code="CAPACITY",
        )
    if 2 * n > MAX_BUILD_QUBITS:
        raise SizeCapExceeded(f"2n = {2 * n} exceeds the construction cap {MAX_BUILD_QUBITS}")
    d = 1 << n
    h = np.zeros((d * d, d * d))
    for c in instance.clauses:
        (v1, n1), (v2, n2), (v3, n3) = c
        s1, s2, s3 = (0 if neg else 1 for neg in (n1, n2, n3))
        x = x_operator(n, edges[v1 - 1], s1)
        y = y_operator(n, edges[v2 - 1], s2, edges[v3 - 1], s3)
        h += np.kron(x, (y + y.T) / 2)
    return HermitianOperator(h)


# --- artifact -------------------------------------------------------------------


@dataclass
class ReductionArtifact:
    instance: SatInstance
    vertices: int
    var_to_edge: dict
    H: HermitianOperator
    H1: HermitianOperator = None
    H2: HermitianOperator = None
    H3: HermitianOperator = None
    H4: HermitianOperator = None
    W: HermitianOperator = None
    gamma: float = None
    delta: float = None
    norm_H_inf: float = None
    norms: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return 1 << self.vertices

    @property
    def n_qubits(self) -> int:
        return 2 * self.vertices

    @property
    def penalty_scale(self) -> float:
        return self.norm_H_inf + 1

    def stage(self, name):
        return {"H_2COPY": self.H, "H1_GRAPHS": self.H1, "H2_COHERENT": self.H2,
                "H3_OVERLAP": self.H3, "H4_STAB": self.H4}[name]

    def to_dict(self) -> dict:
        mats = {}
        for key in ("H", "H1", "H2", "H3", "H4", "W"):
            op = getattr(self, key)
            if op is not None:
                mats[key] = encode_matrix(op.matrix)
        return {
            "format": "magic-reduction-artifact",
            "version": __version__,
            "instance": self.instance.to_dict(),
            "vertices": self.vertices,
            "n_qubits": self.n_qubits,
            "var_to_edge": {str(k): list(v) for k, v in sorted(self.var_to_edge.items())},
            "matrices": mats,
            "gamma": self.gamma,
            "delta": self.delta,
            "norm_H_inf": self.norm_H_inf,
            "norms": self.norms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, data) -> "ReductionArtifact":
        mats = {k: HermitianOperator(decode_matrix(v), tol=1e-8) for k, v in data["matrices"].items()}
        art = cls(
            instance=SatInstance.from_dict(data["instance"]),
            vertices=int(data["vertices"]),
            var_to_edge={int(k): tuple(v) for k, v in data["var_to_edge"].items()},
            H=mats["H"],
        )
        for key in ("H1", "H2", "H3", "H4", "W"):
            setattr(art, key, mats.get(key))
        art.gamma, art.delta = data.get("gamma"), data.get("delta")
        art.norm_H_inf = data.get("norm_H_inf")
        art.norms = data.get("norms", {})
        return art

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def encode_matrix(m) -> dict:
    """Row-major complex128 little-endian bytes, base64 encoded."""
    a = np.ascontiguousarray(np.asarray(m, dtype="<c16"))
    return {"shape": list(a.shape), "dtype": "complex128", "order": "C",
            "data": base64.b64encode(a.tobytes()).decode("ascii")}


def decode_matrix(data) -> np.ndarray:
    raw = base64.b64decode(data["data"])
    return np.frombuffer(raw, dtype="<c16").reshape(data["shape"]).copy()


def penalty_graph_terms(n):
    """Sum of the stage-1 penalties ``sum X-bar + sum W`` (instance independent)."""
    m = 2 * n
    p = np.zeros((1 << m, 1 << m))
    for i in range(n):
        for j in range(n):
            p += xbar_operator(n, i, j)
    for i in range(n):
        for j in range(n):
            if i != j:
                p += w_operator(n, i, j, i, j)
    return p


def penalty_phase_terms(n):
    m = 2 * n
    return sum(s_operator(m, i) for i in range(m))


def build_stage_hamiltonians(art: ReductionArtifact) -> ReductionArtifact:
    """Add the graph, phase, overlap and orthogonality penalty stages."""
    n, d = art.vertices, art.d
    h = art.H.matrix.real
    dim = d * d
    k = art.penalty_scale
    zero = np.zeros((dim, dim))
    zero[0, 0] = 1.0
    eye = np.eye(dim)
    h1 = h + k * penalty_graph_terms(n)
    h2 = h1 + 2 * k * penalty_phase_terms(n)
    h3 = h2 + dim * k * (zero - eye / dim)
    c4 = art.norm_H_inf + schatten_norm(h3 - h2, np.inf) + 1
    h4 = h3 + c4 * (eye - dim * zero)
    art.H1, art.H2, art.H3, art.H4 = (HermitianOperator(x) for x in (h1, h2, h3, h4))
    art.norms.update({"H4_coefficient": float(c4), "H3_minus_H2_inf": float(schatten_norm(h3 - h2, np.inf))})
    return art


def norm_bound(d: int) -> float:
    """``2^4 d^7 log2(d)^6``."""
    return 16.0 * d**7 * log2(d) ** 6


def finalize_wwd(art: ReductionArtifact) -> ReductionArtifact:
    """``W = -H4/|H4|_2``, ``gamma = -1/(2|H4|_2)``, ``delta = 1/(4 d^2 |H4|_2)``."""
    h4 = art.H4.matrix
    nrm = schatten_norm(h4, 2)
    art.W = HermitianOperator(-h4 / nrm)
    art.gamma = -1.0 / (2 * nrm)
    art.delta = 1.0 / (4 * art.d**2 * nrm)
    art.norms.update({"H4_frobenius": nrm, "norm_bound": norm_bound(art.d),
                      "norm_bound_holds": bool(nrm <= norm_bound(art.d) + 1e-6)})
    return art


def reduce_instance(instance: SatInstance, vertices: int = None) -> ReductionArtifact:
    """Full pipeline: clause Hamiltonian, four penalty stages and the WWD triple."""
    n = vertices or min_vertices(instance.num_vars)
    h = build_clause_hamiltonian(instance, n)
    edges = edge_list(n)
    art = ReductionArtifact(
        instance=instance,
        vertices=n,
        var_to_edge={k + 1: edges[k] for k in range(instance.num_vars)},
        H=h,
        norm_H_inf=schatten_norm(h.matrix, np.inf),
    )
    build_stage_hamiltonians(art)
    return finalize_wwd(art)


# --- verification ----------------------------------------------------------------


@dataclass
class VerificationReport:
    stage: str
    mode: str
    satisfiable: bool
    scans: list
    min_value: float
    max_value: float
    argmin: dict
    threshold: dict
    passed: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "mode": self.mode,
            "satisfiable": self.satisfiable,
            "scans": self.scans,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "argmin": self.argmin,
            "threshold": self.threshold,
            "passed": self.passed,
            "notes": self.notes,
        }


def _range_values(op, family, jobs):
    from .scan import scan_family

    return scan_family(op, family, jobs=jobs)


def _describe(tag, m, index, vector):
    info = {"family": tag, "index": int(index)}
    if tag in ("GRAPH", "DOUBLED_GRAPH"):
        info["adjacency_mask"] = int(index)
    info["amplitudes"] = {"real": np.round(vector.real, 12).tolist(), "imag": np.round(vector.imag, 12).tolist()}
    return info


def verify_stage(art: ReductionArtifact, stage: str, mode: str = "exhaustive", rng=None, jobs=1,
                 long_running=False, samples=None) -> VerificationReport:
    """Scan the stage's designated family and test its YES/NO inequality.

    Stages ``H_2COPY``..``H3_OVERLAP`` minimise ``<sigma|H_k|sigma>``; SAT needs
    minimum 0 and UNSAT minimum >= 1. ``H4_STAB`` maximises ``tr(W sigma)``;
    SAT needs a value >= gamma + delta and UNSAT all scanned values <= gamma - delta.

    ``mode`` is ``exhaustive`` or ``sample:N``. For stages whose family is too
    large to enumerate, sampled mode adds ``N`` uniform samples to the
    exhaustive parts (graph states, doubled graph states). ``samples`` may
    override per-family sample counts, e.g. ``{"MAX_COHERENT": 10**5,
    "ALL_STABILIZER": 10**6}``.
    """
    from .scan import scan_samples

    if stage not in STAGES:
        raise InvalidOperator(f"unknown stage {stage!r}; expected one of {STAGES}")
    m = art.n_qubits
    if m > MAX_VERIFY_QUBITS:
        raise SizeCapExceeded(f"verification is limited to 2n <= {MAX_VERIFY_QUBITS}")
    rng = rng if rng is not None else np.random.default_rng(0)
    sat = brute_force_sat(art.instance)[0] == 0
    n_samples = None
    if mode.startswith("sample:"):
        n_samples = int(float(mode.split(":", 1)[1]))
    elif mode != "exhaustive":
        raise InvalidOperator(f"unknown mode {mode!r}")

    is_h4 = stage == "H4_STAB"
    op = art.W.matrix if is_h4 else art.stage(stage).matrix
    plan = []  # (family tag, exhaustive?, count)
    if stage == "H_2COPY":
        plan = [("DOUBLED_GRAPH", True, None)]
    elif stage == "H1_GRAPHS":
        plan = [("DOUBLED_GRAPH", True, None), ("GRAPH", True, None)]
    elif stage == "H2_COHERENT":
        plan = [("DOUBLED_GRAPH", True, None), ("GRAPH", True, None)]
        plan.append(("MAX_COHERENT", n_samples is None, n_samples))
    elif stage == "H3_OVERLAP":
        plan = [("DOUBLED_GRAPH", True, None), ("GRAPH", True, None)]
        plan.append(("OVERLAP_T", n_samples is None, n_samples))
    else:
        plan = [("DOUBLED_GRAPH", True, None), ("GRAPH", True, None)]
        if n_samples is None:
            if m > 4 and not long_running:
                raise SizeCapExceeded(
                    "exhaustive H4 scan on more than 4 qubits needs long_running=True "
                    f"({StateFamily('ALL_STABILIZER', m).size} states)"
                )
            plan.append(("ALL_STABILIZER", True, None))
        else:
            plan.append(("MAX_COHERENT", False, n_samples))
            plan.append(("ALL_STABILIZER", False, n_samples))
    if samples:
        plan = [(t, ex, samples.get(t, c) if not ex else c) for t, ex, c in plan]
        for t, c in samples.items():
            if not any(p[0] == t for p in plan):
                plan.append((t, False, c))
        plan = [p for p in plan if p[1] or p[2]]

    scans = []
    best_min = best_max = None
    for tag, exhaustive, count in plan:
        if exhaustive:
            fam = StateFamily(tag, m)
            if fam.size > 5 * 10**7 and not long_running:
                raise SizeCapExceeded(f"{tag} has {fam.size} states; use sample:N or long_running=True")
            res = _range_values(op, fam, jobs)
        else:
            res = scan_samples(op, m, count, rng, tag)
        scans.append({"family": tag, "exhaustive": exhaustive, "count": res.count,
                      "min": res.min_value, "max": res.max_value})
        if best_min is None or res.min_value < best_min[0]:
            best_min = (res.min_value, {"sampled": not exhaustive,
                                        **_describe(tag, m, res.argmin, res.min_vector)})
        if best_max is None or res.max_value > best_max[0]:
            best_max = (res.max_value, {"sampled": not exhaustive,
                                        **_describe(tag, m, res.argmax, res.max_vector)})

    lo, hi = best_min[0], best_max[0]
    notes = []
    if is_h4:
        up, down = art.gamma + art.delta, art.gamma - art.delta
        threshold = {"yes_at_least": up, "no_at_most": down}
        passed = hi >= up if sat else hi <= down
        argbest = best_max[1]
        if not sat and not passed:
            notes.append(
                f"max tr(W sigma) = {hi:.6g} exceeds gamma - delta = {down:.6g} at {argbest['family']} "
                f"index {argbest['index']}"
            )
    else:
        threshold = {"sat_minimum": 0.0, "unsat_minimum_at_least": 1.0}
        passed = abs(lo) <= 1e-9 if sat else lo >= 1 - 1e-9
        argbest = best_min[1]
    if any(not s["exhaustive"] for s in scans):
        notes.append("sampled scans: YES answers are certified, NO answers cover only the scanned states")
    return VerificationReport(
        stage=stage, mode=mode, satisfiable=sat, scans=scans, min_value=float(lo), max_value=float(hi),
        argmin=argbest, threshold=threshold, passed=bool(passed), notes=notes,
    )
