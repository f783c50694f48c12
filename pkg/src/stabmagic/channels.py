"""Channel classification through Choi states."""

import json
from dataclasses import dataclass

import numpy as np

from .clifford import T1
from .errors import InvalidOperator, SizeCapExceeded
from .membership import Decision, decide_wmem, extract_witness
from .pauli import DensityMatrix, matrix_from_dict

COMPLETENESS_TOL = 1e-9


class QuantumChannel:
    """CPTP map in Kraus form ``rho -> sum_k K rho K^dagger``."""

    def __init__(self, kraus_ops):
        ks = [np.asarray(k, dtype=complex) for k in kraus_ops]
        if not ks:
            raise InvalidOperator("channel needs at least one Kraus operator")
        d = ks[0].shape[0]
        if any(k.shape != (d, d) for k in ks):
            raise InvalidOperator("Kraus operators must be square and of equal size")
        if d & (d - 1):
            raise InvalidOperator("channel dimension must be a power of two")
        gram = sum(k.conj().T @ k for k in ks)
        if np.max(np.abs(gram - np.eye(d))) > COMPLETENESS_TOL:
            raise InvalidOperator("Kraus operators are not trace preserving", code="NOT_TRACE_PRESERVING")
        self.kraus_ops = ks
        self.dim = d
        self.n_qubits = d.bit_length() - 1

    @classmethod
    def unitary(cls, u):
        return cls([u])

    def __call__(self, rho):
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def compose(self, other: "QuantumChannel") -> "QuantumChannel":
        """``self`` after ``other``."""
        return QuantumChannel([a @ b for a in self.kraus_ops for b in other.kraus_ops])

    def to_dict(self) -> dict:
        return {
            "n": self.n_qubits,
            "kraus": [{"real": k.real.tolist(), "imag": k.imag.tolist()} for k in self.kraus_ops],
        }

    @classmethod
    def from_dict(cls, data) -> "QuantumChannel":
        ops = []
        for k in data["kraus"]:
            if "real" in k:
                ops.append(np.asarray(k["real"], dtype=float) + 1j * np.asarray(k.get("imag", 0.0), dtype=float))
            else:
                ops.append(matrix_from_dict(k))
        return cls(ops)

    @classmethod
    def load(cls, path) -> "QuantumChannel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def identity_channel(n=1):
    return QuantumChannel([np.eye(1 << n)])


def dephasing_channel(p):
    """``rho -> (1-p) rho + p Z rho Z``."""
    return QuantumChannel([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * np.diag([1.0, -1.0])])


def depolarizing_kraus(w):
    """``rho -> (1-w) rho + w I/2``."""
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
    return [np.sqrt(1 - 3 * w / 4) * paulis[0]] + [np.sqrt(w / 4) * p for p in paulis[1:]]


def depolarized_t_channel(w):
    """T gate followed by depolarizing noise of weight ``w``."""
    return QuantumChannel([k @ T1 for k in depolarizing_kraus(w)])


def random_channel(n, rng, rank=2):
    """Kraus set from a QR-orthonormalised Gaussian isometry."""
    d = 1 << n
    g = rng.normal(size=(rank * d, d)) + 1j * rng.normal(size=(rank * d, d))
    q, _ = np.linalg.qr(g)
    return QuantumChannel([q[k * d : (k + 1) * d] for k in range(rank)])


def choi_state(channel: QuantumChannel) -> DensityMatrix:
    """``(E (x) I)|phi+><phi+|`` with the channel acting on the first register."""
    d = channel.dim
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    proj = np.outer(phi, phi.conj())
    out = np.zeros((d * d, d * d), dtype=complex)
    for k in channel.kraus_ops:
        kk = np.kron(k, np.eye(d))
        out += kk @ proj @ kk.conj().T
    return DensityMatrix(out, tol=1e-9)


def partial_trace_first(m, d):
    """Trace out the first (output) register of a ``d^2 x d^2`` operator."""
    return np.einsum("ajak->jk", np.asarray(m).reshape(d, d, d, d))


@dataclass
class ChannelVerdict:
    decision: Decision
    membership: object
    witness: object = None

    def to_dict(self) -> dict:
        out = {"decision": self.decision.value, "membership": self.membership.to_dict()}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        return out


def classify_cspc(channel: QuantumChannel, eps: float, depth=True) -> ChannelVerdict:
    """Completely stabilizer-preserving test on a single-qubit channel."""
    if channel.n_qubits != 1:
        raise SizeCapExceeded("exact channel classification is limited to one qubit")
    rho = choi_state(channel)
    verdict = decide_wmem(rho.matrix, eps, depth=depth)
    wit = extract_witness(rho.matrix, verdict) if verdict.decision is Decision.NO else None
    return ChannelVerdict(verdict.decision, verdict, wit)


def classify_ctdspc(channel: QuantumChannel, t: int, net_eps: float, eps: float, include=()) -> ChannelVerdict:
    """Completely t-doping stabilizer-preserving test against a net dictionary."""
    from .doped import build_doped_dictionary, decide_doped_membership

    if channel.n_qubits != 1:
        raise SizeCapExceeded("doped channel classification is limited to one qubit")
    if t == 0:
        return classify_cspc(channel, eps)
    rho = choi_state(channel)
    dic = build_doped_dictionary(2, t, net_eps, include=include)
    verdict = decide_doped_membership(rho.matrix, dic, eps)
    wit = extract_witness(rho.matrix, verdict, dic) if verdict.decision is Decision.NO else None
    return ChannelVerdict(verdict.decision, verdict, wit)


def depolarized_t_threshold(eps: float = 1e-3, tol: float = 0.01, lo: float = 0.0, hi: float = 1.0):
    """Bisect the noise weight at which the depolarized T channel becomes free.

    Membership is monotone in ``w`` along the segment towards the free
    fully-depolarizing channel. Weights whose Choi state sits in the
    promise band count as free for the search (hysteresis). Returns
    ``(lo, hi)`` with ``hi - lo <= tol``; ``lo`` is NO and ``hi`` is not.
    """

    def free(w):
        return classify_cspc(depolarized_t_channel(w), eps, depth=False).decision is not Decision.NO

    if free(lo) or not free(hi):
        raise InvalidOperator("threshold is not bracketed by the initial interval")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if free(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi
