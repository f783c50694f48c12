"""Clifford unitaries: breadth-first group closure and random circuits."""

from functools import lru_cache

import numpy as np

from .errors import SizeCapExceeded

H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S1 = np.diag([1, 1j])
T1 = np.diag([1, np.exp(1j * np.pi / 4)])

GROUP_ORDERS = {1: 24, 2: 11520}


def on_qubit(gate, q, n):
    """Embed a single-qubit gate on qubit ``q`` (qubit 0 most significant)."""
    out = np.eye(1, dtype=complex)
    for j in range(n):
        out = np.kron(out, gate if j == q else np.eye(2))
    return out


def cnot(control, target, n):
    d = 1 << n
    y = np.arange(d)
    flip = (y >> (n - 1 - control)) & 1
    m = np.zeros((d, d), dtype=complex)
    m[y ^ (flip << (n - 1 - target)), y] = 1
    return m


def generators(n):
    gens = [on_qubit(H1, q, n) for q in range(n)] + [on_qubit(S1, q, n) for q in range(n)]
    gens += [cnot(c, t, n) for c in range(n) for t in range(n) if c != t]
    return gens


def phase_key(u, decimals=8):
    """Hashable key identifying a matrix or vector up to a global phase."""
    flat = u.ravel()
    first = flat[np.flatnonzero(np.abs(flat) > 1e-6)[0]]
    v = u * (abs(first) / first)
    return (np.round(v, decimals) + 0.0).tobytes()


@lru_cache(maxsize=None)
def clifford_group(n: int) -> np.ndarray:
    """All Clifford unitaries on ``n <= 2`` qubits modulo global phase.

    Built by breadth-first closure over ``{H, S, CNOT}``; the result has
    shape ``(|C_n|, 2^n, 2^n)`` and is read-only.
    """
    if n not in GROUP_ORDERS:
        raise SizeCapExceeded("Clifford group is materialised only for n in {1, 2}")
    gens = generators(n)
    ident = np.eye(1 << n, dtype=complex)
    seen = {phase_key(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                w = g @ u
                k = phase_key(w)
                if k not in seen:
                    seen[k] = w
                    nxt.append(w)
        frontier = nxt
    group = np.array(list(seen.values()))
    if len(group) != GROUP_ORDERS[n]:
        raise RuntimeError(f"closure produced {len(group)} elements, expected {GROUP_ORDERS[n]}")
    group.setflags(write=False)
    return group


def random_clifford(n: int, rng, depth=None) -> np.ndarray:
    """Clifford unitary from a random ``{H, S, CNOT}`` circuit.

    For ``n <= 2`` the element is drawn uniformly from the materialised
    group instead.
    """
    if n in GROUP_ORDERS:
        group = clifford_group(n)
        return group[rng.integers(len(group))]
    gens = generators(n)
    u = np.eye(1 << n, dtype=complex)
    for _ in range(depth or 20 * n * n):
        u = gens[rng.integers(len(gens))] @ u
    return u
