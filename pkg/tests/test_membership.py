import numpy as np
import pytest

from oracles import bloch, density_from_bloch, project_l1_ball
from stabmagic.dictionary import StateDictionary, stabilizer_dictionary
from stabmagic.errors import PromiseError
from stabmagic.membership import (
    Decision,
    check_wwd_instance,
    decide_wmem,
    extract_witness,
    min_norm_point,
    project_onto_polytope,
)
from stabmagic.monotones import robustness_of_magic
from stabmagic.pauli import random_density_matrix, random_pure_state, schatten_norm


def proj(v):
    return np.outer(v, np.conj(v))


def test_min_norm_point_simple():
    pts = np.array([[1.0, 1.0], [1.0, -1.0], [3.0, 0.0]])
    x, w, gap = min_norm_point(pts)
    assert np.abs(x - [1.0, 0.0]).max() < 1e-10
    assert abs(w.sum() - 1) < 1e-12 and gap < 1e-9


def test_projection_single_qubit_oracle(rng):
    # the one-qubit hull is the l1 unit ball in Bloch coordinates
    for _ in range(100):
        rho = random_density_matrix(1, rng) if rng.random() < 0.5 else proj(random_pure_state(1, rng))
        r = bloch(rho)
        ref = project_l1_ball(r)
        v = project_onto_polytope(rho)
        assert np.abs(bloch(v.projection.matrix) - ref).max() < 1e-7
        assert abs(v.distance - np.linalg.norm(r - ref) / np.sqrt(2)) < 1e-7


def test_projection_examples(t_state):
    assert project_onto_polytope(np.eye(2) / 2).distance < 1e-9
    v = project_onto_polytope(proj(t_state))
    assert abs(v.distance - (1 / np.sqrt(2) - 0.5)) < 1e-9
    assert np.abs(bloch(v.projection.matrix) - [0.5, 0.5, 0]).max() < 1e-8
    mix = 0.9 * np.diag([1, 0]) + 0.1 * np.eye(2) / 2
    assert project_onto_polytope(mix).distance < 1e-9


def test_projection_optimality_and_idempotence(rng):
    dic = stabilizer_dictionary(2)
    for _ in range(10):
        rho = proj(random_pure_state(2, rng))
        v = project_onto_polytope(rho)
        tau = v.projection.matrix
        w = rho - tau
        # first-order condition tr((rho - tau)(tau - sigma)) >= 0
        slack = np.trace(w @ tau).real - dic.expectations(w)
        assert slack.min() > -1e-7
        assert abs(v.distance - schatten_norm(w, 2)) < 1e-7
        assert project_onto_polytope(tau).distance < 1e-8
        assert abs(robustness_of_magic(tau).value - 1) < 1e-6
        mid = project_onto_polytope((rho + tau) / 2).distance
        assert mid < v.distance


def test_agreement_with_robustness(rng):
    for k in range(500):
        n = 1 + k % 2
        rho = random_density_matrix(n, rng, rank=1 + k % 3) if k % 5 else proj(random_pure_state(n, rng))
        inside = project_onto_polytope(rho).distance <= 1e-8
        free = robustness_of_magic(rho).value <= 1 + 1e-6
        assert inside == free


def test_decide_wmem_examples(t_state):
    v = decide_wmem(np.eye(2) / 2, 0.05)
    assert v.decision is Decision.YES
    assert abs(v.depth["lower"] - 1 / np.sqrt(6)) < 1e-9 and v.depth["ball_certified"]
    assert decide_wmem(proj(t_state), 0.1).decision is Decision.NO
    # Bloch point outside the octahedron at Frobenius distance 0.05
    r = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    r = r / np.abs(r).sum() + 0.05 * np.sqrt(2) * np.ones(3) / np.sqrt(3)
    rho = density_from_bloch(r)
    assert abs(project_onto_polytope(rho).distance - 0.05) < 1e-9
    assert decide_wmem(rho, 0.1).decision is Decision.PROMISE_VIOLATED
    with pytest.raises(ValueError):
        decide_wmem(rho, 0)


def test_axis_depth_two_qubits():
    v = decide_wmem(np.eye(4) / 4, 0.01)
    assert v.decision is Decision.YES
    assert 0 < v.depth["lower"] <= v.depth["upper"]


def test_witness_t(t_state):
    rep = extract_witness(proj(t_state))
    x = np.array([[0, 1], [1, 0]])
    y = np.array([[0, -1j], [1j, 0]])
    ref = (x + y) * (1 / np.sqrt(2) - 0.5) / 2
    assert np.abs(rep.witness.matrix - ref).max() < 1e-8
    assert rep.margin >= rep.distance**2 - 1e-8
    assert abs(rep.margin - 0.0428932) < 1e-6
    dic = stabilizer_dictionary(1)
    assert dic.expectations(rep.witness.matrix).max() <= rep.gamma + 1e-8


def test_witness_stabilizer_factor(t_state):
    a = extract_witness(proj(t_state)).margin
    b = extract_witness(proj(np.kron(t_state, [1, 0]))).margin
    assert abs(a - b) < 1e-7


def test_witness_interior_raises():
    with pytest.raises(PromiseError):
        extract_witness(np.diag([1.0, 0.0]))


def test_wwd_constant_operator():
    for n in (1, 2):
        d = 2**n
        w = -np.eye(d) / np.sqrt(d)
        # every state gives -1/sqrt(d), which is below gamma - delta = -3/(4 sqrt d)
        res = check_wwd_instance(w, -1 / (2 * np.sqrt(d)), 1 / (4 * np.sqrt(d)))
        assert res.decision is Decision.NO
        assert abs(res.max_value + 1 / np.sqrt(d)) < 1e-12
        res = check_wwd_instance(w, -1 / np.sqrt(d) - 0.1, 0.05)
        assert res.decision is Decision.YES


def test_wwd_t_witness(t_state):
    rep = extract_witness(proj(t_state))
    scale = schatten_norm(rep.witness.matrix, 2)
    w = rep.witness.matrix / scale
    margin = rep.margin / scale
    gamma = rep.gamma / scale + margin / 2
    delta = margin / 4
    assert check_wwd_instance(w, gamma, delta).decision is Decision.NO
    dic = stabilizer_dictionary(1).extended([t_state], "S_1+T")
    res = check_wwd_instance(w, gamma, delta, scan=dic)
    assert res.decision is Decision.YES
    assert check_wwd_instance(w, rep.gamma / scale, 0.0).decision is Decision.YES
    with pytest.raises(PromiseError):
        check_wwd_instance(2 * w, gamma, delta)


def test_wwd_converse(rng):
    # a YES with slack e against the hull plus rho forces distance(rho) > e / ||W||
    base = stabilizer_dictionary(2)
    for _ in range(30):
        psi = random_pure_state(2, rng)
        w = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        w = w + w.conj().T
        w /= schatten_norm(w, 2)
        gamma = base.expectations(w).max()
        dic = StateDictionary(np.vstack([base.vectors, psi]), "S_2+psi")
        res = check_wwd_instance(w, gamma, 0.0, scan=dic)
        slack = res.max_value - gamma
        dist = project_onto_polytope(proj(psi)).distance
        assert dist >= slack / schatten_norm(w, 2) - 1e-8


def test_wwd_sampled_and_families(rng):
    # projector on qubit 0 being |0>, unit Frobenius norm; graph states only reach 1/4
    w = np.kron(np.diag([1.0, 0.0]), np.eye(4)) / 2
    res = check_wwd_instance(w, 0.4, 0.05, scan="sample:200", rng=rng)
    assert res.decision is Decision.YES and res.certified
    assert not check_wwd_instance(w, 0.6, 0.05, scan="sample:50", rng=rng).certified
    assert abs(check_wwd_instance(w, 0.4, 0.05, scan="graphs").max_value - 0.25) < 1e-12
    assert check_wwd_instance(w, 0.4, 0.05, scan="graphs").decision is Decision.NO
    assert check_wwd_instance(w, 0.4, 0.05, scan="exhaustive").decision is Decision.YES
    with pytest.raises(ValueError):
        check_wwd_instance(w, 0.4, 0.05, scan="bogus")
