"""t-doped stabilizer states: packing nets, Clifford-orbit dictionaries,
net-relative membership and closure checks."""

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clifford import clifford_group
from .dictionary import StateDictionary
from .errors import DimensionMismatch, InvalidOperator, SizeCapExceeded
from .membership import decide_wmem, project_onto_polytope
from .pauli import pauli_spectrum_pure
from .stabilizer import stabilizer_state_array

NET_VERSION = 1
STAB_SEEDS = stabilizer_state_array(1)


def trace_distance_pure(a, b) -> float:
    """``sqrt(1 - |<a|b>|^2)`` for unit vectors."""
    return float(np.sqrt(max(0.0, 1 - abs(np.vdot(a, b)) ** 2)))


def bloch_state(vec) -> np.ndarray:
    x, y, z = vec
    theta = np.arccos(np.clip(z, -1, 1))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bloch_vector(psi) -> np.ndarray:
    spec = pauli_spectrum_pure(np.asarray(psi, dtype=complex))
    return np.array([spec[1, 0], spec[1, 1], spec[0, 1]])


def fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z * z)
    phi = i * np.pi * (3 - np.sqrt(5))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def build_net(net_eps: float, include=(), base=(), candidates=None) -> np.ndarray:
    """Greedy single-qubit packing net with pairwise trace distance > ``net_eps``.

    Candidates are tried in order: ``include`` (must be accepted), ``base``
    seeds of a coarser net, stabilizer states, then Fibonacci-sphere points.
    """
    if net_eps <= 0:
        raise InvalidOperator("net_eps must be positive")
    if candidates is None:
        candidates = max(500, int(np.ceil(40 / net_eps**2)))
    thresh = 1 - net_eps**2  # |<a|b>|^2 < thresh  <=>  distance > net_eps
    seeds = []

    def try_add(v, required=False):
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        if seeds:
            ov = np.abs(np.array(seeds).conj() @ v) ** 2
            if np.any(ov >= thresh):
                if required:
                    raise InvalidOperator("an included seed is within net_eps of another seed")
                return
        seeds.append(v)

    for v in include:
        try_add(v, required=True)
    for v in base:
        try_add(v)
    for v in STAB_SEEDS:
        try_add(v)
    for p in fibonacci_sphere(candidates):
        try_add(bloch_state(p))
    return np.array(seeds)


_C1 = None


def _single_qubit_cliffords():
    global _C1
    if _C1 is None:
        _C1 = clifford_group(1)
    return _C1


def covering_radius(seeds) -> float:
    """Largest trace distance from a pure qubit state to the Clifford closure
    of ``seeds`` together with the stabilizer states."""
    from scipy.spatial import SphericalVoronoi

    seeds = np.vstack([STAB_SEEDS, np.asarray(seeds)])
    orbit = np.einsum("gij,sj->gsi", _single_qubit_cliffords(), seeds).reshape(-1, 2)
    pts = np.array([bloch_vector(v) for v in orbit])
    pts = np.unique(np.round(pts, 10), axis=0)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    sv = SphericalVoronoi(pts, radius=1.0, threshold=1e-8)
    cos = np.max(sv.vertices @ pts.T, axis=1)
    angle = float(np.max(np.arccos(np.clip(cos, -1, 1))))
    return float(np.sin(angle / 2))


def cardinality_bound(n: int, t: int, net_eps: float) -> float:
    """``2^(2n^2+3n) (3/eps)^(2^(2t))``."""
    return 2.0 ** (2 * n * n + 3 * n) * (3 / net_eps) ** (2 ** (2 * t))


def _dedupe(vectors):
    v = np.asarray(vectors)
    first = np.argmax(np.abs(v) > 1e-6, axis=1)
    ph = v[np.arange(len(v)), first]
    v = v * (np.abs(ph) / ph)[:, None]
    key = np.round(np.concatenate([v.real, v.imag], axis=1), 8) + 0.0
    _, idx = np.unique(key, axis=0, return_index=True)
    return v[np.sort(idx)]


@dataclass(eq=False)
class DopedDictionary(StateDictionary):
    t: int = 0
    net_eps: float = 0.0
    seeds: np.ndarray = None
    covering_radius: float = 0.0
    provenance: dict = field(default_factory=dict)

    @property
    def coarseness(self) -> float:
        """Frobenius-norm Hausdorff bound between the net hull and the continuous hull."""
        return float(np.sqrt(2) * self.covering_radius)


def _cache_file(n, t, net_eps, include, base):
    root = os.environ.get("MAGIC_CACHE_DIR")
    if not root:
        return None
    h = hashlib.sha256()
    for arr in (include, base):
        h.update(np.ascontiguousarray(np.asarray(arr, dtype=complex)).tobytes())
    name = f"doped_n{n}_t{t}_eps{net_eps:.6g}_v{NET_VERSION}_{h.hexdigest()[:12]}.npz"
    return Path(root) / name


def build_doped_dictionary(n: int, t: int, net_eps: float, include=(), base=()) -> DopedDictionary:
    """Clifford orbit of ``phi (x) |0...0>`` over a packing net of ``t``-qubit seeds."""
    if net_eps <= 0:
        raise InvalidOperator("net_eps must be positive")
    if n not in (1, 2) or t not in (0, 1) or t > n:
        raise SizeCapExceeded("doped dictionaries are built for n in {1, 2} and t in {0, 1}")
    include = [np.asarray(v, dtype=complex) for v in include]
    base = [np.asarray(v, dtype=complex) for v in base]
    path = _cache_file(n, t, net_eps, include, base)
    if path is not None and path.exists():
        data = np.load(path)
        return DopedDictionary(
            data["vectors"], f"S_{n},{t}[eps={net_eps:g}]", t=t, net_eps=net_eps,
            seeds=data["seeds"], covering_radius=float(data["r"]),
            provenance={"net_version": NET_VERSION, "cache": str(path)},
        )
    if t == 0:
        seeds = np.array([[1, 0]], dtype=complex)
        r = 0.0
    else:
        seeds = build_net(net_eps, include, base)
        r = covering_radius(seeds)
    pad = np.zeros(1 << (n - 1))
    pad[0] = 1
    padded = np.array([np.kron(s, pad) for s in seeds])
    group = clifford_group(n)
    orbit = np.einsum("gij,sj->gsi", group, padded).reshape(-1, 1 << n)
    # stabilizer states are t-doped for every t; keep them even when the net skips them
    members = _dedupe(np.vstack([stabilizer_state_array(n), orbit]))
    if len(members) > cardinality_bound(n, t, net_eps):
        raise RuntimeError("dictionary exceeds the packing cardinality bound")
    dic = DopedDictionary(
        members, f"S_{n},{t}[eps={net_eps:g}]", t=t, net_eps=net_eps, seeds=seeds, covering_radius=r,
        provenance={"net_version": NET_VERSION, "seed_count": len(seeds), "fibonacci": t == 1},
    )
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, vectors=members, seeds=seeds, r=r)
    return dic


def check_packing(dic: DopedDictionary) -> float:
    """Smallest pairwise trace distance among the seeds."""
    s = dic.seeds
    if len(s) < 2:
        return np.inf
    ov = np.abs(s.conj() @ s.T) ** 2
    np.fill_diagonal(ov, 0)
    return float(np.sqrt(max(0.0, 1 - ov.max())))


def decide_doped_membership(rho, dic: DopedDictionary, eps: float):
    """Weak membership against the net hull.

    YES answers hold for the continuous doped hull too (the net hull is
    inside it). NO answers are net-relative; ``certified_margin`` subtracts
    the Hausdorff bound between the two hulls, and a positive value
    certifies exclusion from the continuous hull.
    """
    m = np.asarray(rho)
    if m.shape[0] != dic.dim:
        raise DimensionMismatch(f"state dimension {m.shape[0]} differs from dictionary {dic.dim}")
    verdict = decide_wmem(m, eps, dictionary=dic, depth=False)
    verdict.depth = {
        "covering_radius": dic.covering_radius,
        "coarseness": dic.coarseness,
        "certified_margin": verdict.distance - dic.coarseness,
        "note": "NO is relative to the finite net; positive certified_margin excludes the continuous hull",
    }
    return verdict


@dataclass
class ClosureReport:
    projected_norm: float
    projected_distance: float
    partial_trace_distance: float
    passed: bool
    notes: list = field(default_factory=list)


def check_doped_closure(psi, stab, t: int, seed=None, net_eps: float = 0.5, tol: float = 1e-6) -> ClosureReport:
    """Projection and partial-trace closure of a ``t``-doped state.

    ``psi`` lives on ``n + m`` qubits; ``stab`` is an ``m``-qubit stabilizer
    vector for the last ``m`` qubits. Both the normalised projection
    ``(I (x) <stab|)psi`` and ``Tr_m psi`` are tested against the doped
    dictionary on ``n`` qubits whose net contains ``seed``.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    s = np.asarray(getattr(stab, "amplitudes", stab), dtype=complex).ravel()
    dm = s.size
    if psi.size % dm:
        raise DimensionMismatch("stabilizer register does not divide the state dimension")
    dn = psi.size // dm
    n = dn.bit_length() - 1
    block = psi.reshape(dn, dm)
    include = [] if seed is None else [seed]
    dic = build_doped_dictionary(n, t, net_eps, include=include)
    notes = []
    proj = block @ s.conj()
    norm = float(np.linalg.norm(proj))
    if norm < 1e-12:
        pdist = 0.0
        notes.append("projection has zero norm")
    else:
        proj = proj / norm
        pdist = project_onto_polytope(np.outer(proj, proj.conj()), dic).distance
    red = block @ block.conj().T
    tdist = project_onto_polytope(red, dic).distance
    return ClosureReport(norm, pdist, tdist, bool(pdist <= tol and tdist <= tol), notes)
