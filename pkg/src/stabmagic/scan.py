"""Partitioned max/min scans of ``tr(W sigma)`` over state families."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dictionary import StateDictionary
from .stabilizer import FamilyTag, StateFamily, random_coherent_amplitudes, random_stabilizer_amplitudes


def expectation_values(op, vectors) -> np.ndarray:
    """``<v|op|v>`` for every row of ``vectors`` (real part)."""
    v = np.asarray(vectors)
    return np.real(np.sum((v.conj() @ np.asarray(op)) * v, axis=1))


@dataclass
class ScanResult:
    max_value: float
    argmax: int
    max_vector: np.ndarray
    min_value: float
    argmin: int
    min_vector: np.ndarray
    count: int

    def merge(self, other: "ScanResult") -> "ScanResult":
        # commutative: ties go to the smaller index
        hi = self if (self.max_value, -self.argmax) >= (other.max_value, -other.argmax) else other
        lo = self if (self.min_value, self.argmin) <= (other.min_value, other.argmin) else other
        return ScanResult(
            hi.max_value, hi.argmax, hi.max_vector, lo.min_value, lo.argmin, lo.min_vector,
            self.count + other.count,
        )


def _scan_blocks(op, blocks):
    res = None
    for offset, rows in blocks:
        vals = expectation_values(op, rows)
        i, j = int(np.argmax(vals)), int(np.argmin(vals))
        part = ScanResult(
            float(vals[i]), offset + i, rows[i].copy(), float(vals[j]), offset + j, rows[j].copy(), len(vals)
        )
        res = part if res is None else res.merge(part)
    return res


def scan_family(op, family: StateFamily, start=0, stop=None, jobs=1, chunk=1 << 14) -> ScanResult:
    """Exhaustive scan of ``family[start:stop]`` split over ``jobs`` threads."""
    stop = family.size if stop is None else min(stop, family.size)
    cuts = np.linspace(start, stop, max(1, jobs) + 1).astype(np.int64)
    ranges = [(int(a), int(b)) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]

    def work(r):
        return _scan_blocks(op, family.amplitudes(r[0], r[1], chunk))

    if jobs <= 1 or len(ranges) == 1:
        parts = [work(r) for r in ranges]
    else:
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(work, ranges))
    out = parts[0]
    for p in parts[1:]:
        out = out.merge(p)
    return out


def scan_dictionary(op, dic: StateDictionary) -> ScanResult:
    return _scan_blocks(op, [(0, dic.vectors)])


def scan_samples(op, n_qubits, count, rng, family=FamilyTag.ALL_STABILIZER, chunk=1 << 14) -> ScanResult:
    """Scan ``count`` uniform samples; indices refer to the sample order."""
    family = FamilyTag(family)

    def blocks():
        for lo in range(0, count, chunk):
            size = min(chunk, count - lo)
            if family is FamilyTag.MAX_COHERENT:
                rows = random_coherent_amplitudes(n_qubits, size, rng)
            else:
                rows = random_stabilizer_amplitudes(
                    n_qubits, size, rng, through_zero=family is FamilyTag.OVERLAP_T
                )
            yield lo, rows

    return _scan_blocks(op, blocks())
