"""Stabilizer states, graph states and the state families used by the reduction.

Pure stabilizer states are parametrised directly by their amplitudes: the
support is an affine subspace ``{R u + t : u in F_2^k}`` and the amplitude on
``R u + t`` is ``2^{-k/2} i^{a.u} (-1)^{q(u)}`` with ``a`` in ``Z_4^k`` and
``q`` a quadratic form without diagonal. Subspaces are listed through their
reduced row echelon bases and cosets through the representative with zeros
on the pivot columns, which is also the smallest index of the coset, so
every state is produced once with its first nonzero amplitude real positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from itertools import combinations, product
from math import comb

import numpy as np

from .errors import DimensionMismatch, InvalidOperator, SizeCapExceeded
from .pauli import PauliString, pauli_spectrum_pure

FULL_ENUMERATION_CAP = 4
STREAM_CAP = 6
STATE_TOL = 1e-10


def stabilizer_count(n: int) -> int:
    """``2^n prod_{k=1..n} (2^k + 1)``."""
    out = 1 << n
    for k in range(1, n + 1):
        out *= (1 << k) + 1
    return out


def subspace_count(n: int, k: int) -> int:
    """Number of k-dimensional subspaces of F_2^n (Gaussian binomial)."""
    num = den = 1
    for i in range(k):
        num *= (1 << n) - (1 << i)
        den *= (1 << k) - (1 << i)
    return num // den


def _states_per_support(k):
    return 4**k * 2 ** comb(k, 2)


def _rref_bases(n, k):
    """Yield k-dim subspaces of F_2^n as tuples of row masks (index layout)."""
    for pivots in combinations(range(n), k):
        free = []
        for r, p in enumerate(pivots):
            cols = [c for c in range(p + 1, n) if c not in pivots]
            free.append(cols)
        slots = [(r, c) for r, cols in enumerate(free) for c in cols]
        for bits in product((0, 1), repeat=len(slots)):
            rows = [1 << (n - 1 - p) for p in pivots]
            for (r, c), b in zip(slots, bits):
                if b:
                    rows[r] |= 1 << (n - 1 - c)
            yield tuple(rows), pivots


def _coset_reps(n, pivots):
    free = [c for c in range(n) if c not in pivots]
    for bits in product((0, 1), repeat=len(free)):
        t = 0
        for c, b in zip(free, bits):
            if b:
                t |= 1 << (n - 1 - c)
        yield t


@lru_cache(maxsize=None)
def _u_bits(k):
    # (2^k, k) table of the coefficient vectors u, u_0 most significant
    u = np.arange(1 << k)
    return ((u[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1).astype(np.int64)


@lru_cache(maxsize=None)
def _pair_products(k):
    ub = _u_bits(k)
    pairs = list(combinations(range(k), 2))
    if not pairs:
        return np.zeros((0, 1 << k), dtype=np.int64)
    return np.stack([ub[:, i] * ub[:, j] for i, j in pairs])


@lru_cache(maxsize=None)
def _phase_table(k):
    """Exponents of i, shape (4^k * 2^C(k,2), 2^k), for every phase choice."""
    if k == 0:
        return np.zeros((1, 1), dtype=np.int64)
    ub = _u_bits(k)
    a = np.array(list(product(range(4), repeat=k)), dtype=np.int64).reshape(-1, k)
    npairs = comb(k, 2)
    lin = a @ ub.T
    if npairs:
        q = np.array(list(product((0, 1), repeat=npairs)), dtype=np.int64)
        quad = (q @ _pair_products(k)) % 2
    else:
        quad = np.zeros((1, 1 << k), dtype=np.int64)
    return ((lin[:, None, :] + 2 * quad[None, :, :]) % 4).reshape(-1, 1 << k)


def _support_indices(rows, t, k):
    idx = np.full(1 << k, t, dtype=np.int64)
    ub = _u_bits(k)
    for j, r in enumerate(rows):
        idx ^= ub[:, j] * r
    return idx


_I_POWERS = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True)
class _Block:
    k: int
    rows: tuple
    t: int
    size: int


def _blocks(n, through_zero=False):
    for k in range(n + 1):
        size = _states_per_support(k)
        for rows, pivots in _rref_bases(n, k):
            reps = (0,) if through_zero else _coset_reps(n, pivots)
            for t in reps:
                yield _Block(k, rows, t, size)


def _block_amplitudes(n, block, lo, hi):
    d = 1 << n
    table = _phase_table(block.k)[lo:hi]
    idx = _support_indices(block.rows, block.t, block.k)
    out = np.zeros((hi - lo, d), dtype=complex)
    out[:, idx] = _I_POWERS[table] / np.sqrt(1 << block.k)
    return out


def stream_stabilizer_amplitudes(n, start=0, stop=None, chunk=1 << 16, through_zero=False):
    """Yield ``(offset, amplitudes)`` chunks covering the index range.

    Any contiguous ``[start, stop)`` can be generated independently, which
    is what partitioned scans rely on.
    """
    if not 1 <= n <= STREAM_CAP:
        raise SizeCapExceeded(f"stabilizer streaming supports 1 <= n <= {STREAM_CAP}")
    total = overlap_count(n) if through_zero else stabilizer_count(n)
    stop = total if stop is None else min(stop, total)
    pos = 0
    for block in _blocks(n, through_zero):
        end = pos + block.size
        if end <= start:
            pos = end
            continue
        if pos >= stop:
            break
        lo = max(start, pos) - pos
        hi = min(stop, end) - pos
        while lo < hi:
            step = min(hi - lo, chunk)
            yield pos + lo, _block_amplitudes(n, block, lo, lo + step)
            lo += step
        pos = end


@lru_cache(maxsize=None)
def stabilizer_state_array(n: int) -> np.ndarray:
    """All pure stabilizer states on ``n <= 4`` qubits as rows, read-only."""
    if not 1 <= n <= FULL_ENUMERATION_CAP:
        raise SizeCapExceeded(
            f"full enumeration supports 1 <= n <= {FULL_ENUMERATION_CAP}; use streaming"
        )
    arr = np.concatenate([a for _, a in stream_stabilizer_amplitudes(n)])
    arr.setflags(write=False)
    return arr


def overlap_count(n: int) -> int:
    """Number of stabilizer states with ``|0...0>`` in their support."""
    return sum(subspace_count(n, k) * _states_per_support(k) for k in range(n + 1))


# --- state objects --------------------------------------------------------


def _canonical_phase(v):
    nz = np.flatnonzero(np.abs(v) > 1e-9)
    if nz.size == 0:
        raise InvalidOperator("zero state vector")
    return v * np.exp(-1j * np.angle(v[nz[0]]))


class StabilizerState:
    """Pure stabilizer state held as a normalised amplitude vector.

    The generator set is derived from the Pauli spectrum on first access and
    validated against the stored amplitudes.
    """

    def __init__(self, amplitudes, validate=False):
        v = np.array(amplitudes, dtype=complex).ravel()
        n = int(v.size).bit_length() - 1
        if v.size < 2 or (1 << n) != v.size:
            raise InvalidOperator("amplitude vector length is not a power of two")
        norm = np.linalg.norm(v)
        if abs(norm - 1) > 1e-8:
            raise InvalidOperator(f"amplitude vector has norm {norm}")
        v = _canonical_phase(v / norm)
        v.setflags(write=False)
        self.n_qubits = n
        self.amplitudes = v
        if validate:
            self.generators

    @classmethod
    def from_generators(cls, labels) -> "StabilizerState":
        gens = [PauliString.from_label(g) if isinstance(g, str) else g for g in labels]
        n = gens[0].n_qubits
        if len(gens) != n or any(g.n_qubits != n for g in gens):
            raise InvalidOperator("need exactly n generators on n qubits")
        _check_generator_set(gens)
        d = 1 << n
        proj = np.eye(d, dtype=complex)
        for g in gens:
            proj = proj @ (np.eye(d) + g.dense()) / 2
        col = np.argmax(np.linalg.norm(proj, axis=0))
        state = cls(proj[:, col] / np.linalg.norm(proj[:, col]))
        state.__dict__["generators"] = tuple(gens)
        return state

    @cached_property
    def generators(self) -> tuple:
        n, d = self.n_qubits, 1 << self.n_qubits
        spec = pauli_spectrum_pure(self.amplitudes)
        xs, zs = np.nonzero(np.abs(spec) > 1 - 1e-8)
        if xs.size != d:
            raise InvalidOperator("amplitudes do not describe a stabilizer state")
        gens, basis = [], []
        for x, z in zip(xs, zs):
            if x == 0 and z == 0:
                continue
            vec = (int(x) << n) | int(z)
            reduced = vec
            for b in basis:
                reduced = min(reduced, reduced ^ b)
            if reduced:
                basis.append(reduced)
                sign = 0 if spec[x, z] > 0 else 2
                gens.append(PauliString(n, int(x), int(z), sign))
            if len(gens) == n:
                break
        _check_generator_set(gens)
        for g in gens:
            if np.max(np.abs(g.dense() @ self.amplitudes - self.amplitudes)) > STATE_TOL:
                raise InvalidOperator("derived generator does not stabilise the state")
        return tuple(gens)

    @property
    def generator_labels(self) -> list[str]:
        return [g.label for g in self.generators]

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def to_dict(self, amplitudes=True) -> dict:
        out = {"n": self.n_qubits, "generators": self.generator_labels}
        if amplitudes:
            out["amplitudes"] = [[float(a.real), float(a.imag)] for a in self.amplitudes]
        return out

    @classmethod
    def from_dict(cls, data) -> "StabilizerState":
        if "amplitudes" in data:
            arr = np.asarray(data["amplitudes"], dtype=float)
            st = cls(arr[:, 0] + 1j * arr[:, 1])
            if "generators" in data:
                want = sorted(data["generators"])
                other = cls.from_generators(data["generators"])
                if state_overlap(st, other) < 1 - 1e-9:
                    raise InvalidOperator(f"amplitudes disagree with generators {want}")
            return st
        return cls.from_generators(data["generators"])

    def __eq__(self, other):
        if not isinstance(other, StabilizerState):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.allclose(
            self.amplitudes, other.amplitudes, atol=1e-9
        )

    def __hash__(self):
        return hash(np.round(self.amplitudes, 8).tobytes())

    def __repr__(self):
        try:
            label = ",".join(self.generator_labels)
        except InvalidOperator:
            label = "?"
        return f"StabilizerState({label})"


def _check_generator_set(gens):
    n = gens[0].n_qubits
    basis = []
    for g in gens:
        if g.x_bits == 0 and g.z_bits == 0:
            raise InvalidOperator("generator proportional to identity")
        if not g.is_hermitian:
            raise InvalidOperator(f"generator {g.label} is not Hermitian")
        vec = (g.x_bits << n) | g.z_bits
        for b in basis:
            vec = min(vec, vec ^ b)
        if vec == 0:
            raise InvalidOperator("generators are not independent")
        basis.append(vec)
    for g, h in combinations(gens, 2):
        if not g.commutes(h):
            raise InvalidOperator(f"generators {g.label} and {h.label} anticommute")


def enumerate_stabilizer_states(n: int) -> list[StabilizerState]:
    """Every pure stabilizer state on ``n <= 4`` qubits, in canonical order."""
    return [StabilizerState(v) for v in stabilizer_state_array(n)]


def state_overlap(s, t) -> float:
    """``|<s|t>|^2`` for states or amplitude vectors."""
    a = s.amplitudes if isinstance(s, StabilizerState) else np.asarray(s)
    b = t.amplitudes if isinstance(t, StabilizerState) else np.asarray(t)
    if a.shape != b.shape:
        raise DimensionMismatch("states live on different qubit counts")
    return float(abs(np.vdot(a, b)) ** 2)


# --- graph states ---------------------------------------------------------


def edge_list(n: int) -> list[tuple[int, int]]:
    """Vertex pairs ``(i, j)``, ``i < j``, in lexicographic order."""
    return list(combinations(range(n), 2))


@dataclass(frozen=True)
class GraphAdjacency:
    """Simple graph; ``bits`` has one bit per pair of :func:`edge_list`.

    Bit ``p`` (least significant first) is the entry for ``edge_list(n)[p]``.
    """

    n_vertices: int
    bits: int = 0

    def __post_init__(self):
        if self.n_vertices < 1:
            raise InvalidOperator("graph needs at least one vertex")
        if not 0 <= self.bits < 1 << comb(self.n_vertices, 2):
            raise InvalidOperator("adjacency bits exceed C(n,2)")

    @classmethod
    def from_edges(cls, n, edges) -> "GraphAdjacency":
        pos = {e: p for p, e in enumerate(edge_list(n))}
        bits = 0
        for i, j in edges:
            if i == j:
                raise InvalidOperator("self loops are not allowed")
            bits |= 1 << pos[(min(i, j), max(i, j))]
        return cls(n, bits)

    @classmethod
    def from_matrix(cls, a) -> "GraphAdjacency":
        a = np.asarray(a, dtype=int)
        if np.any(a != a.T) or np.any(np.diag(a)):
            raise InvalidOperator("adjacency must be symmetric with zero diagonal")
        n = a.shape[0]
        return cls.from_edges(n, [(i, j) for i, j in edge_list(n) if a[i, j] % 2])

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [e for p, e in enumerate(edge_list(self.n_vertices)) if self.bits >> p & 1]

    def has_edge(self, i, j) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def matrix(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices), dtype=int)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a


@lru_cache(maxsize=None)
def _edge_parities(m):
    # (C(m,2), 2^m) table of x_i x_j for every basis string x
    x = np.arange(1 << m)
    bit = lambda i: (x >> (m - 1 - i)) & 1
    return np.stack([bit(i) * bit(j) for i, j in edge_list(m)]) if m > 1 else np.zeros((0, 2))


def graph_amplitudes(m: int, masks) -> np.ndarray:
    """Real amplitude rows ``d^{-1/2} (-1)^{sum_{i<j} A_ij x_i x_j}``."""
    masks = np.asarray(masks, dtype=np.int64).ravel()
    npairs = comb(m, 2)
    if npairs == 0:
        return np.full((masks.size, 1 << m), 1 / np.sqrt(1 << m))
    bits = (masks[:, None] >> np.arange(npairs)[None, :]) & 1
    parity = (bits @ _edge_parities(m)) % 2
    return (1 - 2 * parity) / np.sqrt(1 << m)


def graph_state(a: GraphAdjacency) -> StabilizerState:
    return StabilizerState(graph_amplitudes(a.n_vertices, [a.bits])[0])


# --- families -------------------------------------------------------------


class FamilyTag(str, Enum):
    ALL_STABILIZER = "ALL_STABILIZER"
    GRAPH = "GRAPH"
    DOUBLED_GRAPH = "DOUBLED_GRAPH"
    MAX_COHERENT = "MAX_COHERENT"
    OVERLAP_T = "OVERLAP_T"


# diagonal single-qubit Cliffords I, S, Z, SZ
COHERENT_PHASES = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True)
class StateFamily:
    """A named set of stabilizer states on ``n_qubits`` qubits in total."""

    tag: FamilyTag
    n_qubits: int

    def __post_init__(self):
        object.__setattr__(self, "tag", FamilyTag(self.tag))
        if self.n_qubits < 1:
            raise InvalidOperator("family needs at least one qubit")
        if self.tag is FamilyTag.DOUBLED_GRAPH and self.n_qubits % 2:
            raise DimensionMismatch("doubled graph states need an even qubit count")

    @property
    def size(self) -> int:
        m = self.n_qubits
        if self.tag is FamilyTag.ALL_STABILIZER:
            return stabilizer_count(m)
        if self.tag is FamilyTag.GRAPH:
            return 1 << comb(m, 2)
        if self.tag is FamilyTag.DOUBLED_GRAPH:
            return 1 << comb(m // 2, 2)
        if self.tag is FamilyTag.MAX_COHERENT:
            return (1 << comb(m, 2)) * 4**m
        return overlap_count(m)

    def amplitudes(self, start=0, stop=None, chunk=1 << 15):
        """Yield ``(offset, amplitude rows)`` for the index range ``[start, stop)``."""
        m, size = self.n_qubits, self.size
        stop = size if stop is None else min(stop, size)
        if start < 0 or start > stop:
            raise InvalidOperator("bad index range")
        tag = self.tag
        if tag in (FamilyTag.ALL_STABILIZER, FamilyTag.OVERLAP_T):
            yield from stream_stabilizer_amplitudes(
                m, start, stop, chunk, through_zero=tag is FamilyTag.OVERLAP_T
            )
            return
        for lo in range(start, stop, chunk):
            hi = min(stop, lo + chunk)
            idx = np.arange(lo, hi)
            if tag is FamilyTag.GRAPH:
                yield lo, graph_amplitudes(m, idx).astype(complex)
            elif tag is FamilyTag.DOUBLED_GRAPH:
                g = graph_amplitudes(m // 2, idx)
                yield lo, np.einsum("bi,bj->bij", g, g).reshape(len(idx), -1).astype(complex)
            else:
                yield lo, coherent_amplitudes(m, idx // 4**m, idx % 4**m)

    def states(self, start=0, stop=None):
        for _, block in self.amplitudes(start, stop):
            for v in block:
                yield StabilizerState(v)

    def contains(self, amplitudes) -> bool:
        return FAMILY_PREDICATES[self.tag](np.asarray(amplitudes))


def enumerate_family(family: StateFamily, start=0, stop=None):
    """Stream the family members as :class:`StabilizerState` objects."""
    return family.states(start, stop)


def coherent_amplitudes(m, graph_masks, phase_codes) -> np.ndarray:
    """``(prod_i U_i)|G(A)>`` with ``U_i = diag(1, phi_i)``, phases coded base 4.

    Digit ``i`` of ``phase_codes`` (qubit 0 most significant) selects
    ``phi_i`` from :data:`COHERENT_PHASES`.
    """
    g = graph_amplitudes(m, graph_masks).astype(complex)
    codes = np.asarray(phase_codes, dtype=np.int64).ravel()
    x = np.arange(1 << m)
    expo = np.zeros((codes.size, 1 << m), dtype=np.int64)
    for i in range(m):
        digit = (codes // 4 ** (m - 1 - i)) % 4
        xi = (x >> (m - 1 - i)) & 1
        expo += digit[:, None] * xi[None, :]
    return g * _I_POWERS[expo % 4]


# --- membership predicates -----------------------------------------------


def is_stabilizer_vector(v, tol=1e-8) -> bool:
    v = np.asarray(v, dtype=complex)
    if abs(np.linalg.norm(v) - 1) > tol:
        return False
    spec = pauli_spectrum_pure(v)
    return int(np.sum(np.abs(spec) > 1 - tol)) == v.size and bool(
        np.all((np.abs(spec) < tol) | (np.abs(spec) > 1 - tol))
    )


def _graph_mask_from_vector(v, m):
    # reads A_ij off the amplitude of |i,j> relative to |0>
    bits = 0
    for p, (i, j) in enumerate(edge_list(m)):
        idx = (1 << (m - 1 - i)) | (1 << (m - 1 - j))
        if np.real(v[idx] / v[0]) < 0:
            bits |= 1 << p
    return bits


def is_graph_vector(v, tol=1e-8) -> bool:
    v = np.asarray(v, dtype=complex)
    m = v.size.bit_length() - 1
    if abs(v[0]) < tol:
        return False
    v = v * abs(v[0]) / v[0]
    ref = graph_amplitudes(m, [_graph_mask_from_vector(v, m)])[0]
    return bool(np.max(np.abs(v - ref)) < tol)


def is_max_coherent_vector(v, tol=1e-8) -> bool:
    v = np.asarray(v, dtype=complex)
    m = v.size.bit_length() - 1
    if np.max(np.abs(np.abs(v) - 1 / np.sqrt(v.size))) > tol:
        return False
    v = v * abs(v[0]) / v[0]
    code = 0
    for i in range(m):
        phi = v[1 << (m - 1 - i)] / v[0]
        match = np.flatnonzero(np.abs(COHERENT_PHASES - phi) < tol)
        if match.size != 1:
            return False
        code = code * 4 + int(match[0])
    x = np.arange(v.size)
    expo = np.zeros(v.size, dtype=np.int64)
    for i in range(m):
        expo += ((code // 4 ** (m - 1 - i)) % 4) * ((x >> (m - 1 - i)) & 1)
    return is_graph_vector(v / _I_POWERS[expo % 4], tol)


def in_overlap_family(v, tol=1e-8) -> bool:
    v = np.asarray(v, dtype=complex)
    return bool(abs(v[0]) ** 2 >= 1 / v.size - tol) and is_stabilizer_vector(v, tol)


def is_doubled_graph_vector(v, tol=1e-8) -> bool:
    v = np.asarray(v, dtype=complex)
    m = v.size.bit_length() - 1
    if m % 2 or not is_graph_vector(v, tol):
        return False
    half = m // 2
    g = graph_amplitudes(half, [_graph_mask_from_vector(v[:: 1 << half], half)])[0]
    return bool(np.max(np.abs(v * abs(v[0]) / v[0] - np.kron(g, g))) < tol)


FAMILY_PREDICATES = {
    FamilyTag.ALL_STABILIZER: is_stabilizer_vector,
    FamilyTag.GRAPH: is_graph_vector,
    FamilyTag.DOUBLED_GRAPH: is_doubled_graph_vector,
    FamilyTag.MAX_COHERENT: is_max_coherent_vector,
    FamilyTag.OVERLAP_T: in_overlap_family,
}


# --- uniform samplers -----------------------------------------------------


def random_stabilizer_amplitudes(m: int, size: int, rng, through_zero=False) -> np.ndarray:
    """Uniform samples from the pure stabilizer states on ``m`` qubits.

    With ``through_zero`` the samples are uniform over the states whose
    support contains ``|0...0>`` (the OVERLAP_T family).
    """
    d = 1 << m
    weights = np.array(
        [
            subspace_count(m, k) * _states_per_support(k) * (1 if through_zero else 1 << (m - k))
            for k in range(m + 1)
        ],
        dtype=float,
    )
    ks = rng.choice(m + 1, size=size, p=weights / weights.sum())
    out = np.zeros((size, d), dtype=complex)
    for k in range(m + 1):
        sel = np.flatnonzero(ks == k)
        if sel.size:
            out[sel] = _random_with_support_dim(m, k, sel.size, rng, through_zero)
    return out


def _random_with_support_dim(m, k, count, rng, through_zero):
    d = 1 << m
    if k == 0:
        t = np.zeros(count, dtype=np.int64) if through_zero else rng.integers(0, d, count)
        out = np.zeros((count, d), dtype=complex)
        out[np.arange(count), t] = 1
        return out
    ub = _u_bits(k)
    rows = np.empty((0, k), dtype=np.int64)
    while rows.shape[0] < count:
        cand = rng.integers(0, d, size=(2 * (count - rows.shape[0]) + 8, k))
        combos = np.zeros((cand.shape[0], 1 << k), dtype=np.int64)
        for j in range(k):
            combos ^= ub[None, :, j] * cand[:, j : j + 1]
        ok = np.all(combos[:, 1:] != 0, axis=1)
        rows = np.concatenate([rows, cand[ok]])
    rows = rows[:count]
    combos = np.zeros((count, 1 << k), dtype=np.int64)
    for j in range(k):
        combos ^= ub[None, :, j] * rows[:, j : j + 1]
    t = np.zeros(count, dtype=np.int64) if through_zero else rng.integers(0, d, count)
    idx = combos ^ t[:, None]
    a = rng.integers(0, 4, size=(count, k))
    expo = a @ ub.T
    npairs = comb(k, 2)
    if npairs:
        q = rng.integers(0, 2, size=(count, npairs))
        expo = expo + 2 * ((q @ _pair_products(k)) % 2)
    out = np.zeros((count, d), dtype=complex)
    np.put_along_axis(out, idx, _I_POWERS[expo % 4] / np.sqrt(1 << k), axis=1)
    return out


def random_coherent_amplitudes(m: int, size: int, rng) -> np.ndarray:
    masks = rng.integers(0, 1 << comb(m, 2), size=size)
    codes = rng.integers(0, 4**m, size=size)
    return coherent_amplitudes(m, masks, codes)
