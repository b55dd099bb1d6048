from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigvalsh_tridiagonal

from pstgraphs import _pykernels
from pstgraphs._backend import HAS_COMPILED, get_kernels
from pstgraphs.families import coutinho, decorated8
from pstgraphs.givens import (
    ChainBlock,
    GivensRotation,
    ReductionError,
    apply_similarity,
    rotation_zeroing,
    site_image,
    split_blocks,
    tridiagonalize,
)
from pstgraphs.graph import one_excitation_hamiltonian

BACKENDS = ["python"] + (["cython"] if HAS_COMPILED else [])


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


@st.composite
def symmetric_matrices(draw, max_n=24):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_symmetric(np.random.default_rng(seed), n)


def test_rotation_convention():
    g = GivensRotation(0, 2, 0.6, 0.8)
    m = g.matrix(3)
    np.testing.assert_allclose(m, [[0.6, 0, 0.8], [0, 1, 0], [-0.8, 0, 0.6]])
    np.testing.assert_allclose(m @ m.T, np.eye(3), atol=1e-15)


def test_rotation_validation():
    with pytest.raises(ReductionError):
        GivensRotation(2, 1, 1.0, 0.0)
    with pytest.raises(ReductionError):
        GivensRotation(0, 1, 1.0, 1.0)
    with pytest.raises(ReductionError):
        rotation_zeroing(0.0, 0.0, 0, 1)


def test_rotation_zeroing():
    g = rotation_zeroing(3.0, 4.0, 1, 2)
    v = g.matrix(3) @ np.array([0.0, 3.0, 4.0])
    np.testing.assert_allclose(v, [0, 5, 0], atol=1e-15)


def test_apply_similarity_matches_dense():
    rng = np.random.default_rng(1)
    h = random_symmetric(rng, 6)
    g = GivensRotation(1, 4, math.cos(0.3), math.sin(0.3))
    G = g.matrix(6)
    out = apply_similarity(h, g)
    np.testing.assert_allclose(out, G @ h @ G.T, atol=1e-13)
    assert np.array_equal(out, out.T)


def test_input_validation():
    with pytest.raises(ReductionError):
        tridiagonalize(np.ones((2, 3)))
    with pytest.raises(ReductionError):
        tridiagonalize(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ReductionError):
        tridiagonalize(np.array([[np.inf]]))


def test_coutinho_single_rotation():
    # one rotation mixes the bridge site into the path
    R = tridiagonalize(one_excitation_hamiltonian(coutinho(2, math.sqrt(2), 2)))
    assert len(R.rotations) == 1
    assert [b.length for b in R.blocks] == [5, 1]
    np.testing.assert_allclose(R.blocks[0].offdiag, [2, math.sqrt(6), math.sqrt(6), 2], atol=1e-14)
    assert R.blocks[1].null_block


def test_identity_on_tridiagonal():
    blk = ChainBlock.from_couplings([1.0, -2.0, 3.0], fields=[0.5, 0, 0, 1])
    R = tridiagonalize(blk.matrix())
    assert R.rotations == ()
    np.testing.assert_array_equal(R.Q, np.eye(4))
    np.testing.assert_array_equal(R.T, blk.matrix())
    assert list(R.signs) == [1, 1, -1, -1]
    np.testing.assert_allclose(R.blocks[0].offdiag, [1, 2, 3])


def test_null_rows_merge():
    h = np.zeros((4, 4))
    h[0, 1] = h[1, 0] = 1.0
    R = tridiagonalize(h)
    assert [(b.length, b.null_block) for b in R.blocks] == [(2, False), (2, True)]


def test_split_blocks_custom_tol():
    T = ChainBlock.from_couplings([1.0, 1e-9, 1.0]).matrix()
    R = tridiagonalize(T)
    assert len(R.blocks) == 1
    assert [b.length for b in split_blocks(R, tol=1e-6)] == [2, 2]


def test_site_image_sender_and_receiver():
    R = tridiagonalize(one_excitation_hamiltonian(coutinho(2, math.sqrt(2), 2)))
    assert site_image(R, 0)[1] == 0
    assert site_image(R, 4)[1] == 4
    # bridge site 5 is a mixture of chain site 2 and the null row
    v, k = site_image(R, 5)
    assert k is None and abs(np.linalg.norm(v) - 1) < 1e-14
    with pytest.raises(IndexError):
        site_image(R, 6)


def test_to_dict_keys():
    R = tridiagonalize(one_excitation_hamiltonian(coutinho(1, 2, 3)))
    d = R.to_dict(emit_q=True)
    assert set(d) == {"T", "blocks", "rotations", "signs", "Q"}
    assert len(d["T"]["diag"]) == 6 and len(d["T"]["offdiag"]) == 5


@settings(max_examples=60, deadline=None)
@given(symmetric_matrices(max_n=64))
def test_reduction_invariants(h):
    n = h.shape[0]
    R = tridiagonalize(h)
    norm = max(np.linalg.norm(h, 2), 1e-300)
    # similarity and orthogonality
    assert np.max(np.abs(R.Q @ R.Q.T - np.eye(n))) < 1e-12
    assert np.max(np.abs(R.Q @ h @ R.Q.T - R.T)) < 1e-12 * max(norm, 1)
    # spectrum against an independent tridiagonal eigensolver
    lam_T = eigvalsh_tridiagonal(np.diag(R.T), np.diag(R.T, 1)) if n > 1 else np.diag(R.T)
    assert np.max(np.abs(np.sort(lam_T) - np.linalg.eigvalsh(h))) < 1e-10 * max(norm, 1)
    # tridiagonal shape, e0 fixed, blocks tile the matrix
    assert np.count_nonzero(np.triu(R.T, 2)) == 0
    assert abs(R.Q[0, 0] - 1) < 1e-15
    assert sum(b.length for b in R.blocks) == n
    # canonical form has nonnegative couplings and is similar through Q_canonical
    Tc = R.T_canonical
    assert np.all(np.diag(Tc, 1) >= 0)
    assert np.max(np.abs(R.Q_canonical @ h @ R.Q_canonical.T - Tc)) < 1e-12 * max(norm, 1)
    # idempotence
    assert tridiagonalize(R.T).rotations == ()


@settings(max_examples=40, deadline=None)
@given(symmetric_matrices(max_n=16), st.integers(0, 2**32 - 1))
def test_leading_block_is_pivot_order_independent(h, seed):
    """Any orthogonal Q with Q e0 = e0 gives the same leading chain up to signs."""
    n = h.shape[0]
    if n < 3:
        return
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n - 1, n - 1)))
    P = np.eye(n)
    P[1:, 1:] = q
    a = tridiagonalize(h).blocks[0]
    b = tridiagonalize(np.triu(P @ h @ P.T) + np.triu(P @ h @ P.T, 1).T).blocks[0]
    assert a.length == b.length
    np.testing.assert_allclose(a.diag, b.diag, atol=1e-9)
    np.testing.assert_allclose(a.offdiag, b.offdiag, atol=1e-9)


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernels not built")
@pytest.mark.parametrize("n", [1, 2, 3, 7, 33])
def test_backend_parity(n):
    h = random_symmetric(np.random.default_rng(n), n)
    Rp = tridiagonalize(h, backend=get_kernels("python"))
    Rc = tridiagonalize(h, backend=get_kernels("cython"))
    np.testing.assert_allclose(Rp.T, Rc.T, atol=1e-13)
    np.testing.assert_allclose(Rp.Q, Rc.Q, atol=1e-13)
    assert len(Rp.rotations) == len(Rc.rotations)
    t = np.linspace(0, 5, 7)
    lam = np.linspace(-1, 1, n)
    w = np.random.default_rng(0).normal(size=n)
    np.testing.assert_allclose(
        get_kernels("python").transfer_grid(lam, w, t), get_kernels("cython").transfer_grid(lam, w, t), atol=1e-13
    )


def test_python_backend_selected_by_name():
    assert get_kernels("python") is _pykernels
    with pytest.raises(ValueError):
        get_kernels("fortran")


@pytest.mark.parametrize("backend", BACKENDS)
def test_each_backend_reduces_decorated8(backend):
    h = one_excitation_hamiltonian(decorated8(1, 1, 1, math.sqrt(3), math.sqrt(2.5)))
    R = tridiagonalize(h, backend=get_kernels(backend))
    want = [1, math.sqrt(3), math.sqrt(2.5), math.sqrt(3.5), math.sqrt(15 / 7), math.sqrt(13 / 7)]
    np.testing.assert_allclose(R.blocks[0].offdiag, want, atol=1e-12)
