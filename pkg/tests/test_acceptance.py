"""Acceptance criteria, one test per criterion.

Each test appends a single PASS/FAIL line that is printed in the terminal
summary (and immediately, when run with ``-s``).
"""

import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, T_VEC
from stabmagic.channels import (
    QuantumChannel,
    classify_cspc,
    depolarized_t_threshold,
    identity_channel,
)
from stabmagic.clifford import T1, clifford_group
from stabmagic.doped import (
    build_doped_dictionary,
    cardinality_bound,
    check_packing,
    decide_doped_membership,
)
from stabmagic.membership import Decision, extract_witness, project_onto_polytope
from stabmagic.monotones import robustness_of_magic, stabilizer_fidelity, stabilizer_renyi_entropy
from stabmagic.pauli import random_density_matrix, random_pure_state, schatten_norm
from stabmagic.reduction import (
    SatInstance,
    brute_force_sat,
    mask_from_assignment,
    norm_bound,
    penalty_graph_terms,
    reduce_instance,
    verify_stage,
)
from stabmagic.stabilizer import (
    StateFamily,
    graph_amplitudes,
    is_doubled_graph_vector,
    stabilizer_count,
    stabilizer_state_array,
)

pytestmark = pytest.mark.acceptance


def record(number, ok, detail, t0):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f} s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def proj(v):
    return np.outer(v, np.conj(v))


# --- 1 ---------------------------------------------------------------------


def test_criterion_1_enumeration_counts():
    t0 = time.perf_counter()
    counts = {n: len(stabilizer_state_array(n)) for n in (1, 2, 3)}
    formula = {n: 2**n * np.prod([2**k + 1 for k in range(1, n + 1)]) for n in (1, 2, 3)}
    elapsed = time.perf_counter() - t0
    ok = counts == {1: 6, 2: 60, 3: 1080} and all(counts[n] == formula[n] == stabilizer_count(n) for n in counts)
    ok = ok and elapsed < 10
    assert record(1, ok, f"counts={counts}", t0)


# --- 2 ---------------------------------------------------------------------


def test_criterion_2_monotone_faithfulness():
    t0 = time.perf_counter()
    m2 = [abs(stabilizer_renyi_entropy(v, 2)) for v in stabilizer_state_array(2)]
    rob = [abs(robustness_of_magic(proj(v)).value - 1) for v in stabilizer_state_array(2)]
    r_t = robustness_of_magic(proj(T_VEC)).value
    f_t = stabilizer_fidelity(proj(T_VEC))
    ok = (
        max(m2) <= 1e-9
        and max(rob) <= 1e-7
        and abs(r_t - np.sqrt(2)) <= 1e-6
        and abs(f_t - (2 + np.sqrt(2)) / 4) <= 1e-9
        and time.perf_counter() - t0 < 60
    )
    detail = f"max|M2|={max(m2):.2e} max|R-1|={max(rob):.2e} R(T)={r_t:.9f} F(T)={f_t:.12f}"
    assert record(2, ok, detail, t0)


# --- 3 ---------------------------------------------------------------------


def test_criterion_3_witness_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_margin = worst_converse = np.inf
    done = 0
    while done < 200:
        rho = proj(random_pure_state(1, rng))
        v = project_onto_polytope(rho)
        if v.distance <= 1e-6:
            continue
        rep = extract_witness(rho, v)
        w = rep.witness.matrix
        worst_margin = min(worst_margin, rep.margin - (v.distance**2 - 1e-8))
        eps = np.trace(w @ rho).real - rep.gamma
        worst_converse = min(worst_converse, v.distance - (eps / schatten_norm(w, 2) - 1e-8))
        done += 1
    ok = worst_margin >= 0 and worst_converse >= 0 and time.perf_counter() - t0 < 60
    detail = f"{done} exterior states, min(margin-dist^2+1e-8)={worst_margin:.2e}, min converse slack={worst_converse:.2e}"
    assert record(3, ok, detail, t0)


# --- 4 ---------------------------------------------------------------------


def test_criterion_4_duality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_gap = worst_norm = -np.inf
    for k in range(100):
        n = 1 + k % 2
        d = 2**n
        rho = random_density_matrix(n, rng, rank=1 + k % d) if k % 3 else proj(random_pure_state(n, rng))
        cert = robustness_of_magic(rho)
        worst_gap = max(worst_gap, abs(cert.gap))
        worst_norm = max(worst_norm, schatten_norm(cert.dual_witness.matrix, 2) - np.sqrt(d * (d + 1)))
    ok = worst_gap <= 1e-7 and worst_norm <= 1e-6 and time.perf_counter() - t0 < 300
    detail = f"max gap={worst_gap:.2e}, max(|W|_2 - sqrt(d(d+1)))={worst_norm:.3f}"
    assert record(4, ok, detail, t0)


# --- 5 ---------------------------------------------------------------------


def test_criterion_5_sandwich_upper():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = -np.inf
    for k in range(1000):
        psi = random_pure_state(1 + k % 2, rng)
        p6 = 2 ** (-2 * stabilizer_renyi_entropy(psi, 3))
        worst = max(worst, stabilizer_fidelity(psi) - p6 ** (1 / 6))
    ok = worst <= 1e-9 and time.perf_counter() - t0 < 300
    assert record(5, ok, f"max(F - P6^(1/6))={worst:.4f} over 1000 states", t0)


# --- 6 and 7 -------------------------------------------------------------------

PATTERNS = [[(1, a), (2, b), (3, c)] for a, b, c in itertools.product((False, True), repeat=3)]


def criterion_6_instances():
    out = [[p for k, p in enumerate(PATTERNS) if sub >> k & 1] for sub in range(256)]
    rng = np.random.default_rng(6)
    for _ in range(20):
        size = int(rng.integers(2, 17))
        out.append([PATTERNS[i] for i in rng.integers(0, 8, size=size)])
    return [SatInstance(3, c) for c in out]


@pytest.fixture(scope="module")
def artifacts():
    return [reduce_instance(inst, 3) for inst in criterion_6_instances()]


def test_criterion_6_reduction(artifacts):
    t0 = time.perf_counter()
    rng = np.random.default_rng(60)
    problems = []
    n_sat = n_unsat = 0

    # SAT <=> min over the 8 doubled graph states is 0; UNSAT => min >= 1
    doubled = np.array([np.kron(g, g) for g in graph_amplitudes(3, np.arange(8))])
    for art in artifacts:
        sat = brute_force_sat(art.instance)[0] == 0
        n_sat, n_unsat = n_sat + sat, n_unsat + (not sat)
        vals = np.einsum("bi,ij,bj->b", doubled, art.H.matrix, doubled).real
        if sat and abs(vals.min()) > 1e-9 or not sat and vals.min() < 1 - 1e-9:
            problems.append(f"two-copy min {vals.min()} for {art.instance.to_dict()}")

    # penalty of stage 1 vanishes exactly on doubled-block graphs
    pen = penalty_graph_terms(3)
    fam = StateFamily("GRAPH", 6)
    zero_set = []
    for off, rows in fam.amplitudes():
        e = np.einsum("bi,ij,bj->b", rows.real, pen, rows.real)
        for k in np.flatnonzero(e < 1e-9):
            zero_set.append(off + k)
        if np.any((e > 1e-9) & (e < 1 - 1e-9)):
            problems.append("stage-1 penalty strictly between 0 and 1")
    rows = graph_amplitudes(6, zero_set)
    if len(zero_set) != 8 or not all(is_doubled_graph_vector(r) for r in rows):
        problems.append(f"stage-1 zero set has {len(zero_set)} graphs")

    # stage H1 exhaustive and H2 sampled on every instance
    for art in artifacts:
        for stage, mode in (("H1_GRAPHS", "exhaustive"), ("H2_COHERENT", "sample:100000")):
            rep = verify_stage(art, stage, mode, rng=rng)
            if not rep.passed:
                problems.append(f"{stage} failed for {art.instance.to_dict()}")

    # final WWD instance
    for art in artifacts:
        e, x = brute_force_sat(art.instance)
        w = art.W.matrix
        if e == 0:
            g = graph_amplitudes(3, [mask_from_assignment(x, 3)])[0]
            sigma = np.kron(g, g)
            if (sigma @ w @ sigma).real < art.gamma + art.delta:
                problems.append(f"WWD YES value too small for {art.instance.to_dict()}")
        else:
            rep = verify_stage(art, "H4_STAB", "sample:1000000", rng=rng)
            if not rep.passed:
                problems.append(
                    f"WWD NO fails for UNSAT {art.instance.to_dict()['clauses'][:2]}...: "
                    f"max tr(W sigma)={rep.max_value:.4g} > gamma-delta={art.gamma - art.delta:.3g} "
                    f"({'; '.join(rep.notes[:1])})"
                )
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 1800
    detail = (
        f"{len(artifacts)} instances ({n_sat} SAT, {n_unsat} UNSAT); "
        f"stage-1 zero set {len(zero_set)} graphs; "
        + ("all checks hold" if not problems else f"{len(problems)} problem(s): " + " | ".join(problems[:3]))
    )
    assert record(6, ok, detail, t0)


def test_criterion_7_norm_chain(artifacts):
    t0 = time.perf_counter()
    worst = max(art.norms["H4_frobenius"] / norm_bound(art.d) for art in artifacts)
    ok = all(art.norms["H4_frobenius"] <= norm_bound(art.d) + 1e-6 for art in artifacts)
    assert record(7, ok, f"{len(artifacts)} artifacts, max |H4|_2 / bound = {worst:.3e}", t0)


# --- 8 ---------------------------------------------------------------------


def test_criterion_8_doped_dictionary():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    dic = build_doped_dictionary(1, 1, 0.5)
    g = rng.normal(size=(10**4, 2)) + 1j * rng.normal(size=(10**4, 2))
    haar = g / np.linalg.norm(g, axis=1, keepdims=True)
    best = np.max(np.abs(haar.conj() @ dic.vectors.T) ** 2, axis=1)
    cover = float(np.sqrt(max(0.0, 1 - best.min())))
    card_ok = len(dic) <= cardinality_bound(1, 1, 0.5) and check_packing(dic) > 0.5
    tt = proj(np.kron(T_VEC, T_VEC))
    base, rows = [], []
    for eps in (0.5, 0.3, 0.2):
        d2 = build_doped_dictionary(2, 1, eps, include=[T_VEC], base=base)
        base = list(d2.seeds)
        card_ok = card_ok and len(d2) <= cardinality_bound(2, 1, eps) and check_packing(d2) > eps
        v = decide_doped_membership(tt, d2, 0.05)
        rows.append((eps, len(d2), v.decision, v.distance, v.depth["certified_margin"]))
    final = rows[-1]
    ok = cover <= 0.5 and card_ok and final[2] is Decision.NO and final[4] > 0 and time.perf_counter() - t0 < 600
    detail = (
        f"max cover distance {cover:.4f} <= 0.5; cardinality ok={card_ok}; T(x)T at net 0.2: "
        f"{final[2].value}, distance {final[3]:.5f}, certified margin {final[4]:.4f}"
    )
    assert record(8, ok, detail, t0)


# --- 9 ---------------------------------------------------------------------


def test_criterion_9_channels():
    t0 = time.perf_counter()
    yes = [classify_cspc(identity_channel(), 1e-3, depth=False).decision]
    yes += [classify_cspc(QuantumChannel.unitary(u), 1e-3, depth=False).decision for u in clifford_group(1)]
    t_verdict = classify_cspc(QuantumChannel.unitary(T1), 1e-3)
    lo, hi = depolarized_t_threshold(eps=1e-3, tol=0.01)
    bound = 1 - 1 / np.sqrt(2)
    ok = (
        all(d is Decision.YES for d in yes)
        and len(yes) == 25
        and t_verdict.decision is Decision.NO
        and t_verdict.witness is not None
        and t_verdict.witness.margin > 0
        and hi - lo <= 0.01
        and hi >= bound - 0.01
        and time.perf_counter() - t0 < 300
    )
    detail = (
        f"{sum(d is Decision.YES for d in yes)}/25 free channels YES; T -> {t_verdict.decision.value} "
        f"(witness margin {t_verdict.witness.margin:.4f}); threshold in [{lo:.4f}, {hi:.4f}], "
        f"state-level bound {bound:.4f}"
    )
    assert record(9, ok, detail, t0)
