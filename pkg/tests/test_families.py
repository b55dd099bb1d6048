from __future__ import annotations

import math

import numpy as np
import pytest

from pstgraphs import families as fam
from pstgraphs.givens import tridiagonalize
from pstgraphs.graph import degree_constraint_check, is_bipartite, one_excitation_hamiltonian
from pstgraphs.spectral import pt_pair_search, transfer_probability

S2, S3, S5 = math.sqrt(2), math.sqrt(3), math.sqrt(5)


def ohm(g):
    return one_excitation_hamiltonian(g)


def sym(n, entries):
    h = np.zeros((n, n))
    for (i, j), v in entries.items():
        h[i, j] = h[j, i] = v
    return h


# -- displayed matrices, 0-based --------------------------------------------------------


def test_coutinho_matrix():
    x, y, z = 1.1, 1.3, 1.7
    want = sym(6, {(0, 1): x, (1, 2): z, (2, 3): z, (3, 4): x, (1, 5): y, (3, 5): y})
    np.testing.assert_array_equal(ohm(fam.coutinho(x, y, z)), want)


def test_tri_coutinho_matrix():
    x, y, z, w = 1.1, 1.3, 1.7, 0.9
    want = sym(7, {(0, 1): x, (1, 2): z, (2, 3): z, (3, 4): x, (1, 5): y, (3, 5): y, (1, 6): w, (3, 6): w})
    np.testing.assert_array_equal(ohm(fam.tri_coutinho(x, y, z, w)), want)


def test_coutinho_n8_matrix():
    x, y, z, w = 1.1, 1.3, 1.7, 0.9
    want = sym(
        8,
        {(0, 1): x, (1, 2): y, (2, 3): w, (3, 4): y, (4, 5): x, (1, 6): z, (4, 7): z, (6, 7): w},
    )
    np.testing.assert_array_equal(ohm(fam.coutinho_n8(x, y, z, w)), want)


def test_decorated8_matrix():
    a, b = S3, math.sqrt(2.5)
    want = sym(8, {(0, 1): 1, (1, 2): a, (2, 3): b, (3, 4): b, (4, 5): a, (5, 6): 1, (3, 7): 1})
    np.testing.assert_array_equal(ohm(fam.decorated8(1, 1, 1, a, b)), want)


def test_decorated11_matrix():
    v1, v2, v3 = 3 / S2, math.sqrt(3.5), S5
    path = [1, v1, v2, v3, v3, v2, v1, 1]
    entries = {(i, i + 1): J for i, J in enumerate(path)}
    entries.update({(3, 9): 1, (5, 10): 1})
    np.testing.assert_array_equal(ohm(fam.decorated11(1, 1, v1, v2, v3)), sym(11, entries))


def test_gen3_layout():
    g = fam.gen3(3, 2, 1.0, [1.0, 2.0, 3.0], [0.5])
    assert g.n == 10
    assert g.coupling(0, 1) == 1.0 and g.coupling(4, 5) == 1.0
    assert g.coupling(1, 2) == 1.0 and g.coupling(3, 4) == 1.0
    assert g.coupling(1, 6) == 2.0 and g.coupling(7, 4) == 2.0
    assert g.coupling(1, 8) == 3.0 and g.coupling(8, 9) == 0.5


# -- structure ------------------------------------------------------------------------------


DEGREE_RULE_FAMILIES = [
    fam.coutinho(1, 2, 3),
    fam.tri_coutinho(1, 2, 3, 4),
    fam.gen1(4, 1, 1, [1, 2, 3, 4]),
    fam.gen3(4, 3, 1, [1, 2, 3, 4], [1, 2]),
    fam.coutinho_n8(1, 2, 3, 4),
    fam.decorated8(1, 1, 1, 2, 3),
    fam.decorated11(1, 1, 2, 3, 4),
]


@pytest.mark.parametrize("g", DEGREE_RULE_FAMILIES)
def test_degree_rule_families_are_bipartite_and_degree_ok(g):
    assert is_bipartite(g) is not None
    assert degree_constraint_check(g)[0]


def test_bridge_families_structure():
    # bridges join two degree-3 sites, which the degree rule excludes
    w = fam.wheatstone(1, 2, 3, 4)
    assert is_bipartite(w) is None
    assert (1, 2) in degree_constraint_check(w)[1]
    for g in (fam.bipartite_wheatstone(1, 2, 3, 4), fam.key_graph(1, 2, 3, 4)):
        assert is_bipartite(g) is not None
        assert not degree_constraint_check(g)[0]


@pytest.mark.parametrize(
    "call",
    [
        lambda: fam.coutinho(0, 1, 1),
        lambda: fam.gen1(2, 1, 1, [1]),
        lambda: fam.gen3(1, 2, 1, [1], [1]),
        lambda: fam.gen2(1, 1, 1, 1, []),
        lambda: fam.key_graph_params(2, 1, 3),
        lambda: fam.coutinho_pt_params(1, 1),
        lambda: fam.decorated8_reduced_general(-1, 1),
    ],
)
def test_constructor_errors(call):
    with pytest.raises(fam.FamilyError):
        call()


# -- closed forms ---------------------------------------------------------------------


def test_key_graph_params_examples():
    np.testing.assert_allclose(fam.key_graph_params(0, 1, 2), (S5, 2, 1.5, 1.5))
    np.testing.assert_allclose(fam.key_graph_params(1, 2, 3), (math.sqrt(21), 2, 2.5, 2.5))
    np.testing.assert_allclose(fam.key_graph_params(1, 3, 5), (math.sqrt(33), 4, 3.5, 3.5))


@pytest.mark.parametrize("jkm", [(0, 1, 2), (1, 2, 3), (1, 3, 5), (0, 2, 3), (2, 3, 7)])
def test_key_graph_chain_spectrum(jkm):
    x, y, v, w = fam.key_graph_params(*jkm)
    blk = tridiagonalize(ohm(fam.key_graph(x, y, v, w))).blocks[0]
    want = sorted([s * (2 * q + 1) for q in jkm for s in (-1, 1)])
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(blk.matrix())), want, atol=1e-10)


def test_key_graph_retuned_sin10_3t():
    # (1,4,7) gives eigenvalues 3 * (1, 3, 5), so the profile is sin^10(3t)
    x, y, v, w = fam.key_graph_params(1, 4, 7)
    t = np.linspace(0, 2 * np.pi, 1000)
    h = ohm(fam.key_graph(x, y, v, w))
    p = np.array([transfer_probability(h, 0, 7, s) for s in t])
    assert np.max(np.abs(p - np.sin(3 * t) ** 10)) < 1e-9


@pytest.mark.parametrize("jm", [(0, 1), (0, 2), (1, 2), (2, 5)])
def test_coutinho_pt_params(jm):
    x, S = fam.coutinho_pt_params(*jm)
    g = fam.coutinho(x, math.sqrt(S / 3), math.sqrt(2 * S / 3))
    t, p = pt_pair_search(ohm(g), 0, 4, 2.0)
    assert p > 1 - 1e-9


def test_decorated8_reduced_general_examples():
    np.testing.assert_allclose(
        fam.decorated8_reduced_general(S3, math.sqrt(2.5)).offdiag,
        [1, S3, math.sqrt(2.5), math.sqrt(3.5), math.sqrt(15 / 7), math.sqrt(13 / 7)],
        atol=1e-14,
    )
    np.testing.assert_allclose(
        fam.decorated8_reduced_general(1, 1).offdiag, [1, 1, 1, S2, 1 / S2, math.sqrt(1.5)], atol=1e-14
    )


def test_decorated8_general_matches_reduction():
    rng = np.random.default_rng(5)
    for v1, v2 in rng.uniform(0.2, 3, (20, 2)):
        blk = tridiagonalize(ohm(fam.decorated8(1, 1, 1, v1, v2))).blocks[0]
        np.testing.assert_allclose(blk.offdiag, fam.decorated8_reduced_general(v1, v2).offdiag, atol=1e-10)


def test_wheatstone_fields_match_reduction():
    rng = np.random.default_rng(6)
    for x, y, z, w in rng.uniform(0.2, 3, (20, 4)):
        R = tridiagonalize(ohm(fam.wheatstone(x, y, z, w)))
        np.testing.assert_allclose(np.diag(R.T), fam.wheatstone_fields(x, y, z, w), atol=1e-9)


def test_decorated11_reduction():
    R = tridiagonalize(ohm(fam.decorated11(1, 1, 3 / S2, math.sqrt(3.5), S5)))
    want = [1, 3 / S2, math.sqrt(3.5), math.sqrt(6), 5 / math.sqrt(6), 4 / S3, 3 * math.sqrt(21) / 8, math.sqrt(163) / 8]
    assert [(b.length, b.null_block) for b in R.blocks] == [(9, False), (2, True)]
    np.testing.assert_allclose(R.blocks[0].offdiag, want, atol=1e-10)


# -- designed transfer on the generalized families ------------------------------------------


@pytest.mark.parametrize("n", range(1, 6))
def test_gen1_designed_transfer(n):
    x, z0, z = fam.gen1_pt_couplings(n, np.random.default_rng(n))
    assert transfer_probability(ohm(fam.gen1(n, x, z0, z)), 0, 4, math.pi / 2) > 1 - 1e-9


@pytest.mark.parametrize("k", range(2, 5))
@pytest.mark.parametrize("n", range(1, 6))
def test_gen3_designed_transfer(k, n):
    x, y, w = fam.gen3_pt_couplings(k, n, np.random.default_rng(10 * k + n))
    g = fam.gen3(k, n, x, y, w)
    assert transfer_probability(ohm(g), 0, n + 3, math.pi / 2) > 1 - 1e-9


# -- registry ----------------------------------------------------------------------------------


def test_build_family_registry():
    g = fam.build_family(fam.FamilySpec("coutinho", {"x": 2, "y": S2, "z": 2}))
    assert g == fam.coutinho(2, S2, 2)
    g = fam.build_family(fam.FamilySpec("gen3", {"x": 1, "y": [1, 2], "w": [1]}, {"k": 2, "n": 2}))
    assert g.n == 8
    spec = fam.FamilySpec("gen2", {"x": 1, "y": 1, "z": 1, "w": [1, 1]})
    assert fam.RECEIVER["gen2"](fam.FamilySpec("gen2", {}, {"n": 3})) == 6
    assert fam.build_family(spec).n == 10
    with pytest.raises(fam.FamilyError, match="unknown family"):
        fam.build_family(fam.FamilySpec("nope"))
    with pytest.raises(fam.FamilyError, match="needs parameter"):
        fam.build_family(fam.FamilySpec("coutinho", {"x": 1}))
    with pytest.raises(fam.FamilyError, match="unknown parameters"):
        fam.build_family(fam.FamilySpec("coutinho", {"x": 1, "y": 1, "z": 1, "q": 1}))
    assert set(fam.RECEIVER) == set(fam.FAMILY_NAMES)
