"""Finite sets of pure states whose convex hull plays the role of the free set."""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import DimensionMismatch, InvalidOperator
from .pauli import pauli_spectrum_pure
from .stabilizer import stabilizer_state_array


@dataclass(eq=False)
class StateDictionary:
    """Pure states stored as amplitude rows plus provenance metadata."""

    vectors: np.ndarray
    tag: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] == 0:
            raise InvalidOperator("dictionary must hold at least one state")
        self.vectors = v

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @cached_property
    def coords(self) -> np.ndarray:
        """``(N, d^2)`` matrix of ``tr(P_i sigma_j)/sqrt(d)`` (one row per state)."""
        spec = np.concatenate(
            [pauli_spectrum_pure(self.vectors[i : i + 4096]) for i in range(0, len(self), 4096)]
        )
        return spec.reshape(len(self), -1) / np.sqrt(self.dim)

    def expectations(self, op) -> np.ndarray:
        """``tr(op sigma_j)`` for every member."""
        m = np.asarray(op)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatch("operator and dictionary dimensions differ")
        v = self.vectors
        return np.real(np.einsum("bi,ij,bj->b", v.conj(), m, v))

    def check_dim(self, rho):
        if np.asarray(rho).shape[0] != self.dim:
            raise DimensionMismatch(
                f"state has dimension {np.asarray(rho).shape[0]}, dictionary {self.dim}"
            )

    def extended(self, extra, tag=None) -> "StateDictionary":
        extra = np.atleast_2d(np.asarray(extra, dtype=complex))
        return StateDictionary(np.vstack([self.vectors, extra]), tag or self.tag + "+extra", dict(self.meta))


@lru_cache(maxsize=None)
def stabilizer_dictionary(n: int) -> StateDictionary:
    return StateDictionary(stabilizer_state_array(n), f"S_{n}")
