"""Fredholm modules, the quantization map and the Chern character."""

import numpy as np
import pytest

from chernlab.algebra import acyclic_extension
from chernlab.chains import BAR_RED, CYCLIC, Chain, random_basis_word
from chernlab.fixtures import (
    discrete_circle,
    exterior_strong,
    getzler_trivial,
    random_weak_cq,
)
from chernlab.fredholm import (
    Homotopy,
    ModuleError,
    acyclic_extend_module,
    bianchi_residual,
    chen_vanish,
    chern_eval,
    chern_pullback_residual,
    chern_scale,
    coclosed_residual,
    conjugate_module,
    curvature,
    double_odd,
    getzler_closed_form,
    module_validate,
    psi_eval,
    psi_quadrature,
    quantize,
    transgression_check,
)
from scipy.linalg import expm


@pytest.fixture(scope="module")
def weak_q1():
    return random_weak_cq(hdim=6, q=1, seed=7, k=1)


@pytest.fixture(scope="module")
def circle_doubled():
    return double_odd(discrete_circle(4, seed=0))


def test_module_validation_kinds(weak_q1, circle_doubled):
    assert module_validate(weak_q1).passed
    rep = module_validate(circle_doubled)
    assert rep.passed
    assert rep.residual("multiplicativity") <= 1e-12


def test_strong_failure_detected(circle_doubled):
    M = circle_doubled
    bad = conjugate_module(M, np.eye(M.hdim))
    bad.weak = False
    h = M.hdim // 2
    rng = np.random.default_rng(0)
    dense = rng.standard_normal((h, h))
    dense = 0.5 * (dense + dense.T)
    # odd Hermitian but not commuting with the multiplications: breaks [Q, c(f)] = c(df)
    bad.Q = M.Q + 0.01 * np.kron(np.array([[0, 1], [1, 0]]), dense).astype(complex)
    rep = module_validate(bad)
    assert not rep.passed
    assert rep.residual("commutator-rule") > 1e-4


def test_acyclic_extension_kills_sigma(circle_doubled):
    ext = acyclic_extension(circle_doubled.alg)
    M_T = acyclic_extend_module(circle_doubled, ext)
    sigma = ext.sigma_index
    assert np.max(np.abs(M_T.c_mats[sigma])) == 0.0
    # restriction to the base algebra is the original representation
    assert np.allclose(M_T.c_mats[: circle_doubled.alg.dim], circle_doubled.c_mats)
    assert M_T.weak


def test_extension_commutes_with_doubling():
    Modd = discrete_circle(3, seed=1)
    ext = acyclic_extension(Modd.alg)
    left = acyclic_extend_module(double_odd(Modd), ext)   # double then extend
    right = double_odd(acyclic_extend_module(Modd, ext))  # extend then double
    assert np.allclose(left.Q, right.Q)
    assert np.allclose(left.c_mats, right.c_mats)
    assert np.allclose(left.cm.e[0], right.cm.e[0])


def test_double_odd_structure():
    Modd = getzler_trivial(4, seed=2)
    M = double_odd(Modd)
    h = Modd.hdim
    assert np.allclose(M.Q @ M.Q, np.kron(np.eye(2), Modd.Q @ Modd.Q))
    e1 = M.cm.e[0]
    assert np.allclose(e1 @ e1, -np.eye(2 * h))
    # even elements act block-diagonally (all of Mat2C is even)
    for i in range(Modd.alg.dim):
        G = M.cm.H.parity.astype(float)
        ci = M.c_mats[i]
        assert np.max(np.abs(ci - G[:, None] * ci * G[None, :])) <= 1e-13


def test_curvature_components(weak_q1, circle_doubled):
    # weak module over a zero-differential algebra: F1 = [Q, c]
    cur = curvature(weak_q1)
    alg = weak_q1.alg
    for i in range(alg.dim):
        sign = (-1.0) ** (int(alg.degree[i]) % 2)
        expected = weak_q1.Q @ weak_q1.c_mats[i] - sign * weak_q1.c_mats[i] @ weak_q1.Q
        got = cur.eval_word((i,))
        assert np.max(np.abs(got - expected)) <= 1e-13
    # strong module: F1(f) = 0 and F2(f, theta) = 0 for degree-0 f
    M = circle_doubled
    curM = curvature(M)
    f = np.zeros(M.alg.dim, dtype=complex)
    f[1] = 1.0  # u^1
    assert np.max(np.abs(curM.eval_slots((f,)))) <= 1e-12
    rng = np.random.default_rng(3)
    theta = np.zeros(M.alg.dim, dtype=complex)
    theta[M.alg.dim - 1] = complex(rng.standard_normal())
    assert np.max(np.abs(curM.eval_slots((f, theta)))) <= 1e-12
    assert np.max(np.abs(curM.eval_slots((theta, f)))) <= 1e-12
    # arity >= 3 vanishes identically
    assert np.max(np.abs(curM.eval_slots((theta, theta, theta)))) == 0.0


def test_curvature_over_extension(circle_doubled):
    # F(sigma) = 1 and F(sigma, theta) = 0 = F(theta, sigma)
    ext = acyclic_extension(circle_doubled.alg)
    M_T = acyclic_extend_module(circle_doubled, ext)
    cur = curvature(M_T)
    sigma = ext.sigma_index
    assert np.max(np.abs(cur.eval_word((sigma,)) - np.eye(M_T.hdim))) <= 1e-13
    rng = np.random.default_rng(4)
    for _ in range(5):
        j = int(rng.integers(0, ext.dim))
        assert np.max(np.abs(cur.eval_word((sigma, j)))) <= 1e-13
        assert np.max(np.abs(cur.eval_word((j, sigma)))) <= 1e-13


def test_quantize_engines_agree(weak_q1):
    rng = np.random.default_rng(5)
    for N in range(0, 5):
        w = random_basis_word(weak_q1.alg, BAR_RED, N, rng)
        a = quantize(weak_q1, 0.7, w, engine="banded")
        b = quantize(weak_q1, 0.7, w, engine="partitions")
        assert np.max(np.abs(a - b)) <= 1e-12
    # partition pruning (blocks <= 2) agrees with the unpruned enumeration
    for N in (3, 4, 5):
        w = random_basis_word(weak_q1.alg, BAR_RED, N, rng)
        a = quantize(weak_q1, 1.0, w, engine="partitions")
        b = quantize(weak_q1, 1.0, w, engine="partitions", unpruned=True)
        assert np.max(np.abs(a - b)) == 0.0


def test_quantize_arity_zero_and_one(weak_q1):
    M = weak_q1
    assert np.max(np.abs(quantize(M, 0.5, ()) - expm(-0.5 * M.Q2))) <= 1e-12
    # N = 1: -T {F(theta)}_{T Q^2}
    from chernlab.hilbert import heat_bracket

    cur = curvature(M)
    w = (1,)
    lhs = quantize(M, 0.8, w)
    rhs = -0.8 * heat_bracket(0.8 * M.Q2, [cur.eval_word(w)], check=False)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_chern_parity_and_unitary_invariance(weak_q1):
    M = weak_q1
    rng = np.random.default_rng(6)
    scale = chern_scale(M)
    # wrong parity words vanish
    for _ in range(30):
        N = int(rng.integers(0, 4))
        w = random_basis_word(M.alg, CYCLIC, N, rng)
        c = Chain.basis_word(M.alg, CYCLIC, w)
        if c.parity() != M.q % 2:
            assert abs(chern_eval(M, c)) <= 1e-12 * scale
    # unitary conjugation invariance
    raw = rng.standard_normal((M.hdim, M.hdim)) + 1j * rng.standard_normal((M.hdim, M.hdim))
    herm = M.cm.project_equivariant(0.5 * (raw + raw.conj().T), 0)
    herm = 0.5 * (herm + herm.conj().T)
    U = expm(1j * herm)
    M2 = conjugate_module(M, U)
    for _ in range(20):
        N = int(rng.integers(0, 4))
        w = random_basis_word(M.alg, CYCLIC, N, rng)
        v1 = chern_eval(M, w)
        v2 = chern_eval(M2, w)
        assert abs(v1 - v2) <= 1e-11 * max(1.0, scale)


def test_chern_restriction_along_extension(circle_doubled):
    # Ch_M = Ch_{M_T} on words over the base algebra
    M = circle_doubled
    ext = acyclic_extension(M.alg)
    M_T = acyclic_extend_module(M, ext)
    rng = np.random.default_rng(7)
    for _ in range(10):
        N = int(rng.integers(0, 3))
        w = random_basis_word(M.alg, CYCLIC, N, rng)
        assert abs(chern_eval(M, w) - chern_eval(M_T, w)) <= 1e-12


def test_coclosedness_and_pullback(circle_doubled):
    M = circle_doubled
    ext = acyclic_extension(M.alg)
    M_T = acyclic_extend_module(M, ext)
    rng = np.random.default_rng(8)
    scale = chern_scale(M_T)
    for _ in range(15):
        N = int(rng.integers(0, 3))
        w = random_basis_word(ext, CYCLIC, N, rng)
        assert abs(coclosed_residual(M_T, w)) <= 1e-9 * scale
        assert chern_pullback_residual(M_T, w) <= 1e-9 * scale


def test_chen_vanish_requires_strong(weak_q1):
    with pytest.raises(ModuleError):
        chen_vanish(weak_q1)


def test_chen_vanish_strong_fixture():
    M = exterior_strong(hdim=4, q=0, seed=9, k=1)
    rep = chen_vanish(M, seed=10, n_words=30)
    assert rep.passed, rep.summary()


def test_psi_matches_definition(weak_q1):
    M = weak_q1
    rng = np.random.default_rng(11)
    raw = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    V = M.cm.project_equivariant(raw, 1)
    V = 0.5 * (V + V.conj().T)
    hom = Homotopy.affine_Q(M, V)
    M_s = hom.module(0.4)
    for N in range(0, 4):
        w = random_basis_word(M.alg, BAR_RED, N, rng)
        a = psi_eval(M_s, V, hom.cdot_of(0.4), 0.9, w)
        b = psi_quadrature(M_s, V, hom.cdot_of(0.4), 0.9, w, nodes=40)
        assert np.max(np.abs(a - b)) <= 1e-10
    # arity-0 component scales linearly in T as T -> 0
    n1 = np.max(np.abs(psi_eval(M_s, V, hom.cdot_of(0.4), 1e-5, ())))
    n2 = np.max(np.abs(psi_eval(M_s, V, hom.cdot_of(0.4), 2e-5, ())))
    assert n2 / n1 == pytest.approx(2.0, rel=1e-3)


def test_bianchi_identity(weak_q1):
    M = weak_q1
    rng = np.random.default_rng(12)
    raw = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    V = M.cm.project_equivariant(raw, 1)
    V = 0.5 * (V + V.conj().T)
    hom = Homotopy.affine_Q(M, V)
    for N in range(0, 3):
        w = random_basis_word(M.alg, BAR_RED, N, rng)
        assert bianchi_residual(hom, 0.3, 1.0, w) <= 1e-6


def test_transgression_small():
    M = random_weak_cq(hdim=4, q=0, seed=13, k=2, strong=True)
    rng = np.random.default_rng(14)
    raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    V = M.cm.project_equivariant(raw, 1)
    V = 0.5 * (V + V.conj().T)
    hom = Homotopy.affine_Q(M, V)
    ext = acyclic_extension(M.alg)
    words = [random_basis_word(ext, CYCLIC, 1 + int(rng.integers(0, 2)), rng) for _ in range(6)]
    rep = transgression_check(hom, words, s_nodes=16, ext_alg=ext)
    assert rep.passed, rep.summary()
    # V = 0: both sides vanish
    rep0 = transgression_check(Homotopy.affine_Q(M, np.zeros_like(V)), words[:2],
                               s_nodes=8, ext_alg=ext)
    assert rep0.max_residual() <= 1e-12


def test_getzler_closed_form_matches_doubling():
    Modd = getzler_trivial(4, seed=15)
    M = double_odd(Modd)
    rng = np.random.default_rng(16)
    scale = chern_scale(M)
    hits = 0
    for _ in range(30):
        N = int(rng.integers(0, 6))
        w = random_basis_word(Modd.alg, CYCLIC, N, rng)
        closed = getzler_closed_form(Modd, w)
        doubled = chern_eval(M, w)
        assert abs(closed - doubled) <= 1e-9 * scale
        if N % 2 == 0:
            assert closed == 0.0
        elif abs(closed) > 1e-9:
            hits += 1
    assert hits > 3  # the comparison is not vacuous


def test_getzler_rejects_graded_input():
    M = discrete_circle(3, seed=0)
    with pytest.raises(ModuleError):
        getzler_closed_form(M, (0, 4))


def test_trace_norm_bound_calibrated(circle_doubled):
    from chernlab.fredholm import calibrate_nu, phi_estimate_ratio

    M = circle_doubled
    rng = np.random.default_rng(17)
    cal = [random_basis_word(M.alg, CYCLIC, 1 + int(rng.integers(0, 3)), rng)[1:] for _ in range(15)]
    kappa = calibrate_nu(M, cal, (0.25, 1.0, 4.0))
    for _ in range(20):
        w = random_basis_word(M.alg, CYCLIC, 1 + int(rng.integers(0, 3)), rng)[1:]
        for T in (0.25, 1.0, 4.0):
            assert phi_estimate_ratio(M, w, T, kappa=kappa) <= 1.0 + 1e-10
