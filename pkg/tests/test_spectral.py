"""The odd character chain, twisted families and the spectral-flow pairing."""

import numpy as np
import pytest

from chernlab.algebra import MatrixElement, acyclic_extension, dga_validate, DgAlgebra
from chernlab.fixtures import circle_loop_element, discrete_circle, discrete_circle_algebra
from chernlab.spectral import (
    SpectralError,
    TERM_SIGN,
    ab_matrix_slots,
    ch_g,
    ch_g_closed,
    diagnostic_affine_sf,
    lift_matrix_to_ext,
    pairing,
    pairing_term,
    pairing_term_direct,
    partition_resum_check,
    perturbation_series,
    sf_endpoint_oracle,
    sf_integral,
    twisted_family,
)
from scipy.linalg import expm


@pytest.fixture(scope="module")
def small_g():
    alg = discrete_circle_algebra(2)
    return circle_loop_element(alg, eps=0.5, seed=3)


@pytest.fixture(scope="module")
def circle6():
    return discrete_circle(6, seed=0)


@pytest.fixture(scope="module")
def tf6(circle6):
    g = circle_loop_element(circle6.alg, eps=0.10, seed=7)
    return twisted_family(circle6, g)


def test_universal_maurer_cartan_slots():
    # algebra C<w>/(w^3) with dw = -w^2: exercises the sigma omega^2 branch
    mul = np.zeros((3, 3, 3), dtype=complex)
    mul[0, 0, 0] = 1
    mul[0, 1, 1] = mul[1, 0, 1] = 1
    mul[0, 2, 2] = mul[2, 0, 2] = 1
    mul[1, 1, 2] = 1  # w * w = w^2, w * w^2 = 0
    diff = np.zeros((3, 3), dtype=complex)
    diff[2, 1] = -1.0  # d w = -w^2
    alg = DgAlgebra(3, [0, 1, 2], 0, mul, diff, name="universal-mc")
    assert dga_validate(alg).passed
    ext = acyclic_extension(alg)
    omega = MatrixElement(np.eye(3, dtype=complex)[1].reshape(1, 1, 3), alg)
    omega_T = lift_matrix_to_ext(omega, ext)
    for s in (0.3, 0.8):
        a_s, b = ab_matrix_slots(omega_T, s)
        # d_T A(s) = -s^2 omega^2 and A(s) A(s) = s^2 omega^2
        omega2 = omega_T @ omega_T
        assert (a_s.d() + omega2.scale(s * s)).max_norm() <= 1e-13
        assert (a_s @ a_s - omega2.scale(s * s)).max_norm() <= 1e-13
        # A B = -s sigma omega^2 = -(B A)
        ab = a_s @ b
        ba = b @ a_s
        assert (ab + ba).max_norm() <= 1e-13
        assert (b @ b).max_norm() <= 1e-13
        # d_T B = sigma omega^2 - omega
        from chernlab.spectral import sigma_left_mult

        expect = sigma_left_mult(omega2) - omega_T
        assert (b.d() - expect).max_norm() <= 1e-13


def test_ch_g_zero_cases(small_g):
    alg = small_g.alg
    gid = MatrixElement.identity(1, alg)
    assert ch_g(gid, 3).total().norm() == 0.0
    ch = ch_g(small_g, 3)
    assert ch.component(0).norm() == 0.0
    for N, c in ch.chains.items():
        if c.terms:
            assert c.parity() == 1  # every component is odd


def test_ch_g_closed_report(small_g):
    rep = ch_g_closed(small_g, 5)
    assert rep.passed, rep.summary()
    assert rep.residual("connes-part-reduces-to-zero") == 0.0


def test_ch_g_closed_m2():
    alg = discrete_circle_algebra(2)
    rng = np.random.default_rng(5)
    entries = np.zeros((2, 2, alg.dim), dtype=complex)
    for p in range(2):
        for q in range(2):
            vals = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            if p == q:
                vals += 1.5
            entries[p, q] = alg.deg0_uneval(vals)
    g = MatrixElement(entries, alg)
    rep = ch_g_closed(g, 3)
    assert rep.passed, rep.summary()


def test_twisted_family_identities(tf6):
    assert tf6.report.passed, tf6.report.summary()
    # s = 0 gives back Q_m; s = 1 is the conjugated operator (same spectrum)
    assert np.max(np.abs(tf6.Q_s(0.0) - tf6.Q_m)) == 0.0
    assert sf_endpoint_oracle(tf6) <= 1e-10


def test_twisted_family_requires_strong(circle6):
    weak = discrete_circle(4, seed=0)
    weak.weak = True
    g = circle_loop_element(weak.alg, eps=0.2, seed=1)
    with pytest.raises(SpectralError):
        twisted_family(weak, g)


def test_perturbation_series_matches_exponential(tf6):
    for s in (0.0, 0.5, 1.0):
        ps, tail = perturbation_series(tf6, s, 1.0, 14)
        direct = expm(-(tf6.Q_s(s) @ tf6.Q_s(s)))
        assert np.max(np.abs(ps - direct)) <= 1e-8
        assert tail <= 1e-8
    # X_0 = 0: the series is exactly the heat operator
    ps0, _ = perturbation_series(tf6, 0.0, 1.0, 3)
    assert np.max(np.abs(ps0 - expm(-tf6.Q_m @ tf6.Q_m))) == 0.0


def test_perturbation_series_tail_error(tf6):
    with pytest.raises(SpectralError):
        perturbation_series(tf6, 1.0, 1.0, 1, tail_tol=1e-12)


def test_sf_methods_agree_and_vanish(tf6):
    sf = sf_integral(tf6, s_nodes=16, M_max=14)
    assert abs(sf["direct"] - sf["series"]) <= 1e-8
    assert abs(sf["direct"]) <= 1e-8  # finite-dimensional degeneracy


def test_diagnostic_affine_path():
    rng = np.random.default_rng(11)
    d = 6
    A = rng.standard_normal((d, d))
    Q0 = 0.5 * (A + A.T) + 0.0j
    B = rng.standard_normal((d, d))
    Q1 = 0.5 * (B + B.T) + 0.0j
    out = diagnostic_affine_sf(Q0, Q1, s_nodes=48)
    assert abs(out["integral"] - out["oracle"]) <= 1e-8
    assert isinstance(out["crossings"], int)


def test_partition_resummation(tf6):
    assert partition_resum_check(tf6, 0.0, 1.0, 1) <= 1e-12  # both sides e^{-T Q~^2}
    assert partition_resum_check(tf6, 0.5, 1.0, 1) <= 1e-12  # exact match at M_max = 1
    assert partition_resum_check(tf6, 0.8, 1.0, 3) <= 1e-8


def test_pairing_term_marked_engine_vs_direct(tf6):
    for N in (1, 2, 3):
        for s in (0.3, 0.9):
            a = pairing_term(tf6, N, s)
            b = pairing_term_direct(tf6, N, s)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_pairing_identity_orientation(tf6):
    # the per-degree identity holds with TERM_SIGN = -1 and fails with +1
    from chernlab.spectral import sf_series_term

    p1 = pairing_term(tf6, 1, 0.5)
    s0 = sf_series_term(tf6, 0, 0.5)
    assert abs(p1 - TERM_SIGN * s0) <= 1e-12
    assert abs(p1 + TERM_SIGN * s0) > 1e-4  # terms are genuinely nonzero


def test_pairing_report_small(circle6):
    g = circle_loop_element(circle6.alg, eps=0.10, seed=7)
    rep = pairing(circle6, g, N_max=6, tail_tol=1e-3)
    assert rep.checks.passed, rep.checks.summary()
    assert rep.checks.notes["nonzero_terms"] == 6
    data = rep.as_dict()
    assert data["verdict"] is True
    assert len(data["terms"]) == 6


def test_pairing_tail_guard(circle6):
    g = circle_loop_element(circle6.alg, eps=0.4, seed=7)
    with pytest.raises(SpectralError):
        pairing(circle6, g, N_max=3, tail_tol=1e-9)


def test_doubling_reshuffle_isomorphism():
    # pairing data on (H^m)~ equals the reshuffle of the doubled matrix module
    from chernlab.fredholm import acyclic_extend_module, double_odd, matrix_module
    from chernlab.algebra import mat_lift

    Modd = discrete_circle(3, seed=2)
    ext = acyclic_extension(Modd.alg)
    M_T = acyclic_extend_module(Modd, ext)
    m = 2
    lifted = mat_lift(ext, m)
    left = double_odd(matrix_module(M_T, m, lifted_alg=lifted))  # (H^m)~
    h = Modd.hdim
    # U: (v+, v-) in (H^m)~ -> ((v1+, v1-), ..., (vm+, vm-)) in (H~)^m
    n = 2 * m * h
    U = np.zeros((n, n))
    for p in range(m):
        for sgn in range(2):
            for x in range(h):
                row = p * 2 * h + sgn * h + x   # index in (H~)^m
                col = sgn * m * h + p * h + x   # index in (H^m)~
                U[row, col] = 1.0
    # right-hand side: Mat_m of the doubled module, built directly
    Mq = double_odd(M_T)
    mats = lifted._mat_basis
    c_right = np.stack([np.kron(B, Mq.c_mats[i]) for B in mats for i in range(ext.dim)])
    Q_right = np.kron(np.eye(m), Mq.Q)
    assert np.max(np.abs(U @ left.Q @ U.T - Q_right)) <= 1e-13
    worst = max(
        float(np.max(np.abs(U @ left.c_mats[a] @ U.T - c_right[a])))
        for a in range(lifted.dim)
    )
    assert worst <= 1e-13
