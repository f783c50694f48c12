"""Pauli strings, dense Hermitian operators and the norms used throughout.

Bit convention: a basis index ``y`` of an n-qubit register is read with
qubit 0 as the most significant bit. Pauli masks use the same layout, so
``X^x`` maps ``|y>`` to ``|y ^ x>`` and ``Z^z`` contributes
``(-1)^popcount(z & y)``. The Hermitian Pauli attached to masks ``(x, z)``
is ``sigma(x, z) = i^{|x & z|} X^x Z^z``, i.e. a tensor product of
``I, X, Y, Z`` with ``Y = iXZ``.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from .errors import DimensionMismatch, InvalidOperator, SizeCapExceeded

MAX_QUBITS = 8
HERMITIAN_TOL = 1e-10

_LETTERS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PHASE_PREFIX = {"+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_PHASE_NAMES = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def popcount(a):
    """Bit count for ints or integer numpy arrays."""
    if isinstance(a, (int, np.integer)):
        return int(a).bit_count()
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


def _pair_phase(x1, z1, x2, z2):
    # exponent g with sigma_1 sigma_2 = i^g sigma_(1+2), single qubit
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliString:
    """Signed n-qubit Pauli operator ``i^phase_exp * sigma(x_bits, z_bits)``."""

    n_qubits: int
    x_bits: int
    z_bits: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidOperator("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise InvalidOperator("Pauli masks do not fit in n_qubits bits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"XZI"``, ``"+XZI"``, ``"-iYY"``."""
        body = label.lstrip("+-i")
        prefix = label[: len(label) - len(body)]
        if prefix not in ("",) + tuple(_PHASE_PREFIX):
            raise InvalidOperator(f"bad phase prefix in {label!r}")
        phase = _PHASE_PREFIX.get(prefix, 0)
        if not body or any(c not in _LETTERS for c in body):
            raise InvalidOperator(f"bad Pauli label {label!r}")
        n = len(body)
        x = z = 0
        for j, c in enumerate(body):
            bx, bz = _LETTERS[c]
            x |= bx << (n - 1 - j)
            z |= bz << (n - 1 - j)
        return cls(n, x, z, phase)

    @property
    def label(self) -> str:
        n = self.n_qubits
        letters = []
        for j in range(n):
            bx = (self.x_bits >> (n - 1 - j)) & 1
            bz = (self.z_bits >> (n - 1 - j)) & 1
            letters.append("IZXY"[bx * 2 + bz])
        return _PHASE_NAMES[self.phase_exp] + "".join(letters)

    def __str__(self):
        return self.label

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    @property
    def index(self) -> int:
        """Position of the unsigned Pauli in :func:`all_paulis` order."""
        return self.x_bits * (1 << self.n_qubits) + self.z_bits

    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatch("Pauli strings act on different qubit counts")
        g = self.phase_exp + other.phase_exp
        for q in range(self.n_qubits):
            g += _pair_phase(
                (self.x_bits >> q) & 1,
                (self.z_bits >> q) & 1,
                (other.x_bits >> q) & 1,
                (other.z_bits >> q) & 1,
            )
        return PauliString(
            self.n_qubits,
            self.x_bits ^ other.x_bits,
            self.z_bits ^ other.z_bits,
            g % 4,
        )

    def __neg__(self):
        return PauliString(self.n_qubits, self.x_bits, self.z_bits, self.phase_exp + 2)

    def commutes(self, other: "PauliString") -> bool:
        sym = popcount(self.x_bits & other.z_bits) + popcount(self.z_bits & other.x_bits)
        return sym % 2 == 0

    def dense(self) -> np.ndarray:
        d = 1 << self.n_qubits
        y = np.arange(d)
        m = np.zeros((d, d), dtype=complex)
        m[y ^ self.x_bits, y] = (-1.0) ** popcount(y & self.z_bits)
        return (1j ** ((self.phase_exp + popcount(self.x_bits & self.z_bits)) % 4)) * m


def all_paulis(n: int) -> list[PauliString]:
    d = 1 << n
    return [PauliString(n, x, z) for x in range(d) for z in range(d)]


def _qubits_for_dim(dim):
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise InvalidOperator(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise SizeCapExceeded(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
    return n


class HermitianOperator:
    """Immutable dense Hermitian matrix on ``n`` qubits."""

    def __init__(self, matrix, tol: float = HERMITIAN_TOL):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperator("operator must be a square matrix")
        self.n_qubits = _qubits_for_dim(m.shape[0])
        if not np.all(np.isfinite(m)):
            raise InvalidOperator("operator has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise InvalidOperator("operator is not Hermitian")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def eigvalsh(self):
        return np.linalg.eigvalsh(self._m)

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(n_qubits={self.n_qubits})"


class DensityMatrix(HermitianOperator):
    """Unit-trace positive semidefinite operator.

    When built from a state vector the vector is kept in ``vector`` so that
    pure-state routines can avoid an eigendecomposition.
    """

    def __init__(self, matrix, tol: float = HERMITIAN_TOL, vector=None):
        super().__init__(matrix, tol)
        tr = np.trace(self._m).real
        if abs(tr - 1) > tol:
            raise InvalidOperator(f"trace {tr} differs from 1")
        lo = np.linalg.eigvalsh(self._m)[0]
        if lo < -tol:
            raise InvalidOperator(f"minimum eigenvalue {lo} is negative")
        self.vector = vector

    @classmethod
    def from_vector(cls, psi) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidOperator("zero state vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), vector=v)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        d = 1 << n
        return cls(np.eye(d) / d)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self._m, self._m)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return self.purity >= 1 - tol

    def state_vector(self) -> np.ndarray:
        """Dominant eigenvector; only meaningful for pure states."""
        if self.vector is not None:
            return self.vector
        w, v = np.linalg.eigh(self._m)
        return v[:, -1]


def _walsh_hadamard(a):
    # unnormalised transform over the last axis (length 2^k)
    a = np.array(a, dtype=complex)
    lead, d = a.shape[:-1], a.shape[-1]
    h = 1
    while h < d:
        a = a.reshape(lead + (d // (2 * h), 2, h))
        lo = a[..., 0, :] + a[..., 1, :]
        hi = a[..., 0, :] - a[..., 1, :]
        a = np.stack([lo, hi], axis=-2)
        h *= 2
    return a.reshape(lead + (d,))


def pauli_spectrum_pure(psis) -> np.ndarray:
    """Expectations ``<psi|sigma(x,z)|psi>`` for a batch of state vectors.

    Returns a real array of shape ``(B, d, d)`` indexed ``[b, x, z]`` (or
    ``(d, d)`` for a single vector).
    """
    psis = np.asarray(psis, dtype=complex)
    single = psis.ndim == 1
    if single:
        psis = psis[None]
    b, d = psis.shape
    y = np.arange(d)
    out = np.empty((b, d, d))
    z = np.arange(d)
    for x in range(d):
        v = psis[:, y ^ x].conj() * psis
        w = _walsh_hadamard(v)
        ph = 1j ** (popcount(x & z) % 4)
        out[:, x, :] = np.real(w * ph)
    return out[0] if single else out


def pauli_spectrum(rho) -> np.ndarray:
    """``tr(sigma(x,z) rho)`` for every Pauli, shape ``(d, d)`` indexed [x, z]."""
    m = np.asarray(rho, dtype=complex)
    d = m.shape[0]
    y = np.arange(d)
    z = np.arange(d)
    out = np.empty((d, d))
    for x in range(d):
        v = m[y ^ x, y]
        w = _walsh_hadamard(v) * (-1.0) ** popcount(z & x)
        out[x] = np.real(w * 1j ** (popcount(x & z) % 4))
    return out


def pauli_coordinates(rho) -> np.ndarray:
    """Coordinates ``tr(P_i rho)/sqrt(d)`` in the orthonormal Pauli basis."""
    m = np.asarray(rho)
    return pauli_spectrum(m).ravel() / np.sqrt(m.shape[0])


def from_pauli_coordinates(coords, n: int) -> np.ndarray:
    d = 1 << n
    coords = np.asarray(coords).reshape(d, d)
    out = np.zeros((d, d), dtype=complex)
    for p in all_paulis(n):
        c = coords[p.x_bits, p.z_bits]
        if c != 0:
            out += c * p.dense()
    return out / np.sqrt(d)


def _check_same(n1, n2):
    if n1 != n2:
        raise DimensionMismatch(f"qubit counts differ ({n1} vs {n2})")


def pauli_expectation(p: PauliString, rho: DensityMatrix):
    """``tr(P rho)``; real for Hermitian ``P``."""
    m = np.asarray(rho)
    n = _qubits_for_dim(m.shape[0])
    _check_same(p.n_qubits, n)
    y = np.arange(m.shape[0])
    val = np.sum((-1.0) ** popcount(p.z_bits & (y ^ p.x_bits)) * m[y ^ p.x_bits, y])
    val *= 1j ** ((p.phase_exp + popcount(p.x_bits & p.z_bits)) % 4)
    return float(val.real) if p.is_hermitian else complex(val)


def schatten_norm(a, p) -> float:
    """Schatten norm for ``p`` in {1, 2, inf}."""
    m = np.asarray(a)
    if not np.all(np.isfinite(m)):
        raise InvalidOperator("operator has non-finite entries")
    if p == 2:
        return float(np.sqrt(np.sum(np.abs(m) ** 2)))
    if p == 1:
        return float(np.sum(np.abs(np.linalg.eigvalsh(m))))
    if p in (np.inf, "inf", float("inf")):
        return float(np.max(np.abs(np.linalg.eigvalsh(m))))
    raise ValueError(f"unsupported Schatten index {p!r}")


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product ``tr(A^dagger B)`` of Hermitian operators."""
    ma, mb = np.asarray(a), np.asarray(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    return float(np.real(np.vdot(ma, mb)))


def random_pure_state(n: int, rng) -> np.ndarray:
    d = 1 << n
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density_matrix(n: int, rng, rank=None) -> np.ndarray:
    d = 1 << n
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_hermitian(d: int, rng) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


# --- JSON interchange -----------------------------------------------------

def operator_to_dict(a) -> dict:
    m = np.asarray(a)
    n = _qubits_for_dim(m.shape[0])
    return {
        "n": n,
        "entries": [[[float(v.real), float(v.imag)] for v in row] for row in m],
    }


def matrix_from_dict(data: dict) -> np.ndarray:
    """Decode ``{"n", "entries"}`` or ``{"n", "amplitudes"}`` into a matrix."""
    try:
        n = int(data["n"])
        if "entries" in data:
            arr = np.asarray(data["entries"], dtype=float)
            m = arr[..., 0] + 1j * arr[..., 1]
        else:
            arr = np.asarray(data["amplitudes"], dtype=float)
            v = arr[:, 0] + 1j * arr[:, 1]
            v = v / np.linalg.norm(v)
            m = np.outer(v, v.conj())
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InvalidOperator(f"malformed operator JSON: {exc}") from exc
    if m.shape != (1 << n, 1 << n):
        raise DimensionMismatch(f"entries have shape {m.shape}, expected n={n}")
    return m


def operator_from_dict(data: dict) -> HermitianOperator:
    return HermitianOperator(matrix_from_dict(data))


def density_from_dict(data: dict) -> DensityMatrix:
    m = matrix_from_dict(data)
    if "amplitudes" in data and "entries" not in data:
        arr = np.asarray(data["amplitudes"], dtype=float)
        return DensityMatrix.from_vector(arr[:, 0] + 1j * arr[:, 1])
    return DensityMatrix(m)


def load_density(path) -> DensityMatrix:
    with open(path) as fh:
        return density_from_dict(json.load(fh))


def load_operator(path) -> HermitianOperator:
    with open(path) as fh:
        return operator_from_dict(json.load(fh))
