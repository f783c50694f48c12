import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bloch, sre_dense
from stabmagic.clifford import random_clifford
from stabmagic.dictionary import stabilizer_dictionary
from stabmagic.errors import MixedStateError, SizeCapExceeded
from stabmagic.monotones import (
    robustness_of_magic,
    stabilizer_fidelity,
    stabilizer_renyi_entropy,
    t_extended_robustness,
)
from stabmagic.pauli import DensityMatrix, random_density_matrix, random_pure_state
from stabmagic.stabilizer import stabilizer_state_array


def proj(v):
    return np.outer(v, np.conj(v))


def test_sre_matches_dense(rng):
    for n in (1, 2, 3):
        psi = random_pure_state(n, rng)
        for a in (0.5, 2, 3):
            assert abs(stabilizer_renyi_entropy(psi, a) - sre_dense(psi, a)) < 1e-10


def test_sre_t_state(t_state):
    # sum of squared coords: 1 + 2*(1/2)^2 -> M2 = -log2(3/4)
    assert abs(stabilizer_renyi_entropy(t_state, 2) - np.log2(4 / 3)) < 1e-12


def test_sre_zero_on_stabilizers():
    for v in stabilizer_state_array(3)[::7]:
        assert abs(stabilizer_renyi_entropy(v, 2)) < 1e-9


def test_sre_clifford_invariant(rng):
    psi = random_pure_state(2, rng)
    u = random_clifford(2, rng)
    assert abs(stabilizer_renyi_entropy(psi, 2) - stabilizer_renyi_entropy(u @ psi, 2)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sre_nonincreasing_in_alpha(seed):
    psi = random_pure_state(2, np.random.default_rng(seed))
    vals = [stabilizer_renyi_entropy(psi, a) for a in (0.5, 2, 3, 4)]
    assert all(x >= y - 1e-10 for x, y in zip(vals, vals[1:]))


def test_sre_errors():
    with pytest.raises(MixedStateError):
        stabilizer_renyi_entropy(np.eye(2) / 2, 2)
    with pytest.raises(ValueError):
        stabilizer_renyi_entropy([1, 0], 1)


def test_fidelity_single_qubit_oracle(rng):
    # max over the 6 axis states of (1 + |r_k|)/2 for a Bloch vector r
    for _ in range(50):
        rho = random_density_matrix(1, rng)
        r = bloch(rho)
        assert abs(stabilizer_fidelity(rho) - (1 + np.abs(r).max()) / 2) < 1e-12


def test_fidelity_t(t_state):
    assert abs(stabilizer_fidelity(proj(t_state)) - (2 + np.sqrt(2)) / 4) < 1e-12


def test_robustness_single_qubit_oracle(rng):
    # for one qubit the hull is the octahedron, so R = max(1, |x|+|y|+|z|)
    for _ in range(40):
        rho = random_density_matrix(1, rng)
        r = bloch(rho)
        cert = robustness_of_magic(rho)
        assert abs(cert.value - max(1.0, np.abs(r).sum())) < 1e-7
        assert abs(cert.gap) < 1e-7


def test_robustness_t_certificate(t_state):
    cert = robustness_of_magic(proj(t_state), verbose=True)
    assert abs(cert.value - np.sqrt(2)) < 1e-9
    dic = stabilizer_dictionary(1)
    recon = sum(c * proj(dic.vectors[i]) for i, c in cert.primal_coefficients.items())
    assert np.abs(recon - proj(t_state)).max() < 1e-9
    assert abs(sum(abs(c) for c in cert.primal_coefficients.values()) - cert.value) < 1e-9
    w = cert.dual_witness.matrix
    assert np.abs(dic.expectations(w)).max() <= 1 + 1e-9
    assert abs(np.trace(w @ proj(t_state)).real - cert.value) < 1e-7
    assert "dual" in str(cert.to_dict())


def test_robustness_clifford_invariant_and_multiplicative_lower(rng, t_state):
    rho = random_density_matrix(2, rng)
    u = random_clifford(2, rng)
    a = robustness_of_magic(rho).value
    b = robustness_of_magic(u @ rho @ u.conj().T).value
    assert abs(a - b) < 1e-7
    tt = proj(np.kron(t_state, t_state))
    r2 = robustness_of_magic(tt).value
    assert np.sqrt(2) - 1e-7 <= r2 <= 2 + 1e-7


def test_robustness_convex(rng):
    a, b = random_density_matrix(2, rng), random_density_matrix(2, rng)
    ra, rb = robustness_of_magic(a).value, robustness_of_magic(b).value
    rm = robustness_of_magic((a + b) / 2).value
    assert rm <= (ra + rb) / 2 + 1e-7


def test_robustness_size_cap():
    with pytest.raises(SizeCapExceeded):
        robustness_of_magic(DensityMatrix.maximally_mixed(5))


def test_t_extended_bounds(t_state):
    rho = proj(t_state)
    assert abs(t_extended_robustness(rho, 0, 0.5).value - np.sqrt(2)) < 1e-7
    # a 1-doped dictionary containing |T> makes it free
    from stabmagic.doped import build_doped_dictionary

    dic = build_doped_dictionary(1, 1, 0.3, include=[t_state])
    assert abs(t_extended_robustness(rho, 1, 0.3, dictionary=dic).value - 1) < 1e-7
    assert t_extended_robustness(rho, 1, 0.5).value <= np.sqrt(2) + 1e-7
