from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pstgraphs import families as fam
from pstgraphs.design import (
    DesignError,
    DesignProblem,
    piecewise_evolve,
    retrieval_schedule,
    solve_parameters,
    switch_scenario,
    verify_design,
)
from pstgraphs.givens import ChainBlock, tridiagonalize
from pstgraphs.graph import build_graph, one_excitation_hamiltonian
from pstgraphs.spectral import chain_pt_couplings, transfer_probability

S2, S3, S5, S6 = (math.sqrt(k) for k in (2, 3, 5, 6))


def ohm(g):
    return one_excitation_hamiltonian(g)


def coutinho_template():
    return build_graph(
        6, [(0, 1, 2.0), (1, 2, None, "z"), (2, 3, None, "z"), (3, 4, 2.0), (1, 5, None, "y"), (3, 5, None, "y")]
    )


def key_template():
    v = [(2, 4), (3, 5), (2, 5), (3, 4)]
    return build_graph(
        8,
        [(0, 1, None, "x"), (6, 7, None, "x"), (1, 2, None, "y"), (1, 3, None, "y"), (4, 6, None, "y"), (5, 6, None, "y")]
        + [(a, b, None, "v") for a, b in v],
    )


COUTINHO_TARGET = ChainBlock.from_couplings([2, S6, S6, 2])


@pytest.fixture(scope="module")
def coutinho_solutions():
    return solve_parameters(DesignProblem(coutinho_template(), COUTINHO_TARGET), seed=3)


def test_coutinho_design_on_circle(coutinho_solutions):
    sols = coutinho_solutions
    assert len(sols) > 1
    for s in sols:
        y, z = s.assignment["y"], s.assignment["z"]
        assert abs(y * y + z * z - 6) < 1e-9
        assert s.residual < 1e-10
        assert s.pt_report.verdict == "PT"


def test_coutinho_reference_point_has_zero_residual():
    g = coutinho_template().bind({"y": S2, "z": 2.0})
    blk = tridiagonalize(ohm(g)).blocks[0]
    assert np.max(np.abs(np.asarray(blk.offdiag) - COUTINHO_TARGET.offdiag)) < 1e-10


def test_solutions_reverify(coutinho_solutions):
    for s in coutinho_solutions[:5]:
        g = coutinho_template().bind(s.assignment)
        report, t, p = verify_design(g, 0, 4)
        assert report.verdict == "PT" and p > 1 - 1e-9
        blk = tridiagonalize(ohm(g)).blocks[0]
        assert np.max(np.abs(np.asarray(blk.offdiag) - COUTINHO_TARGET.offdiag)) < 1e-10


def test_solutions_distinct_and_sorted(coutinho_solutions):
    pts = [np.array(list(s.assignment.values())) for s in coutinho_solutions]
    for i in range(len(pts)):
        for j in range(i):
            assert np.max(np.abs(pts[i] - pts[j])) > 1e-6
    res = [round(s.residual, 14) for s in coutinho_solutions]
    assert res == sorted(res)


def test_design_is_deterministic():
    p = DesignProblem(coutinho_template(), COUTINHO_TARGET, seeds=6)
    a = solve_parameters(p, seed=11)
    b = solve_parameters(p, seed=11)
    assert [s.assignment for s in a] == [s.assignment for s in b]


def test_key_graph_design_recovers_reference():
    sols = solve_parameters(DesignProblem.from_chain_length(key_template(), 6), seed=0)
    ref = np.array([1.5, S5, 2.0])  # sorted names: v, x, y
    assert any(np.max(np.abs(np.array([s.assignment[k] for k in ("v", "x", "y")]) - ref)) < 1e-6 for s in sols)


def test_design_from_spectrum():
    p = DesignProblem.from_spectrum(coutinho_template(), [-4, -2, 0, 2, 4], seeds=4)
    assert all(abs(s.assignment["y"] ** 2 + s.assignment["z"] ** 2 - 6) < 1e-9 for s in solve_parameters(p))


def test_dimension_mismatch():
    with pytest.raises(DesignError, match="dimension mismatch"):
        solve_parameters(DesignProblem(coutinho_template(), ChainBlock.from_couplings(chain_pt_couplings(4))))
    with pytest.raises(DesignError, match="dimension mismatch"):
        solve_parameters(DesignProblem(coutinho_template(), ChainBlock.from_couplings(chain_pt_couplings(9))))


def test_unsolvable_gives_empty_list():
    # x fixed at 2 but the target asks for end couplings 3
    target = ChainBlock.from_couplings([3, 1, 1, 3])
    assert solve_parameters(DesignProblem(coutinho_template(), target, seeds=4)) == []


def test_no_unknowns_rejected():
    with pytest.raises(DesignError):
        solve_parameters(DesignProblem(fam.coutinho(2, S2, 2), COUTINHO_TARGET))


# -- verification ------------------------------------------------------------------------


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
def test_verify_bipartite_wheatstone(w):
    report, t, p = verify_design(fam.bipartite_wheatstone(2, S3, -S3, w), 0, 6)
    assert report.verdict == "PT"
    assert abs(p - 1) < 1e-9 and abs(t - math.pi / 2) < 1e-6


def test_verify_wheatstone_equal_arms_no_pt():
    report, _, p = verify_design(fam.wheatstone(1.0, 1.0, 1.0, 1.0), 0, 4)
    assert report.verdict == "no-PT" and p < 1 - 1e-6


def test_verify_same_site():
    report, t, p = verify_design(fam.coutinho(1, 2, 3), 2, 2)
    assert (t, p) == (0.0, 1.0) and report.verdict == "PT"


def test_verify_inner_pair_uses_search():
    report, t, p = verify_design(fam.decorated8(1, 1, 1, S3, math.sqrt(2.5)), 1, 5)
    assert report.verdict == "PT" and abs(t - math.pi) < 1e-6
    assert "direct search" in report.diagnostics


def test_verify_bad_site():
    with pytest.raises(DesignError):
        verify_design(fam.coutinho(1, 2, 3), 0, 9)


# -- retrieval and switching ------------------------------------------------------------


def test_retrieval_schedule():
    store = fam.key_graph(S5, 2, -1.5, 1.5)
    sched = retrieval_schedule(store, 3)
    np.testing.assert_allclose(sched.times, [2 * math.pi * n / math.sqrt(13) for n in (1, 2, 3)])
    h = ohm(store)
    for tr in sched.times:
        assert abs(transfer_probability(h, 0, 0, tr) - 1) < 1e-9
    chk = sched.check()
    assert chk["survival_max_dev"] < 1e-9 and chk["far_sites_max"] < 1e-12


def test_retrieval_wiring_mismatch():
    with pytest.raises(DesignError, match="wiring"):
        retrieval_schedule(fam.key_graph(S5, 2, 1.5, 1.5))
    with pytest.raises(DesignError, match="wiring"):
        retrieval_schedule(fam.coutinho(1, 2, 3))
    with pytest.raises(DesignError, match="wiring"):
        retrieval_schedule(fam.key_graph(1, 2, 3, 4).bind({}).permuted([1, 0, 2, 3, 4, 5, 6, 7]))


def test_switch_scenario():
    out = switch_scenario()
    assert out["final_probabilities"][7] > 1 - 1e-9
    assert out["events"][1]["p_site0"] > 1 - 1e-9


def test_piecewise_single_segment_matches_transfer():
    h = ohm(fam.coutinho(2, S2, 2))
    psi = piecewise_evolve([(h, 0.7)], 0)
    for b in range(6):
        assert abs(abs(psi[b]) ** 2 - transfer_probability(h, 0, b, 0.7)) < 1e-12


def test_piecewise_zero_duration_and_errors():
    h = ohm(fam.coutinho(2, S2, 2))
    psi = piecewise_evolve([(h, 0.0), (2 * h, 0.0)], 3)
    np.testing.assert_array_equal(psi, np.eye(6)[3])
    with pytest.raises(DesignError):
        piecewise_evolve([(h, 1.0), (np.eye(3), 1.0)], 0)
    with pytest.raises(DesignError):
        piecewise_evolve([], 0)
    with pytest.raises(DesignError):
        piecewise_evolve([(h, 1.0)], 6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_piecewise_preserves_norm(seed, k):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    segs = []
    for _ in range(k):
        a = rng.normal(size=(n, n))
        segs.append((a + a.T, float(rng.uniform(0, 5))))
    psi = piecewise_evolve(segs, 0)
    assert abs(np.linalg.norm(psi) - 1) < 1e-10 * k
