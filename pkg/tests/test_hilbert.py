"""Clifford modules, supertraces and the simplex heat-bracket kernels."""

import numpy as np
import pytest

from chernlab.hilbert import (
    CliffordModule,
    GradedHilbert,
    HilbertError,
    bracket_insert_unit,
    bracket_oracle,
    bracket_split_quadrature,
    chain_exp_topright,
    clifford_validate,
    cstr,
    cstr_cyclic_sum,
    heat_bracket,
    marked_chain_exp_topright,
    simplex_bracket_quadrature,
    standard_clifford_module,
    supertrace,
    trace_norm,
)

from scipy.linalg import expm


def _rand_psd(rng, d, scale=1.0):
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    H = A @ A.conj().T
    return scale * H / max(1.0, np.max(np.abs(H)))


def _rand_mat(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_clifford_q0_trivial():
    cm = standard_clifford_module(0, 2, 3)
    rep = clifford_validate(cm)
    assert rep.passed
    assert np.allclose(cm.volume_element(), np.eye(5))
    # CStr = Str for q = 0
    rng = np.random.default_rng(0)
    A = _rand_mat(rng, 5)
    assert cstr(cm, A) == pytest.approx(supertrace(cm.H, A))


def test_clifford_q1_standard_matrix():
    cm = standard_clifford_module(1, 1)
    rep = clifford_validate(cm)
    assert rep.passed, rep.summary()
    assert np.allclose(cm.e[0], np.array([[0, 1], [-1, 0]]))


def test_clifford_q2_relations():
    cm = standard_clifford_module(2, 3)
    assert clifford_validate(cm).passed


def test_clifford_forced_failure():
    cm = standard_clifford_module(1, 2)
    bad = CliffordModule(cm.H, 1, [cm.e[0].conj().T * -1.0 + 1e-3])
    assert not clifford_validate(bad).passed


def test_supertrace_of_identity():
    H = GradedHilbert(np.array([1, 1, 1, -1]))
    assert supertrace(H, np.eye(4)) == pytest.approx(2.0)


@pytest.mark.parametrize("q", [0, 1, 2])
def test_cstr_vanishes_on_supercommutators(q):
    rng = np.random.default_rng(q + 1)
    cm = standard_clifford_module(q, 3, 3 if q == 0 else None)
    for _ in range(50):
        pa, pb = int(rng.integers(0, 2)), int(rng.integers(0, 2))
        A = cm.project_equivariant(_rand_mat(rng, cm.dim), pa)
        B = cm.project_equivariant(_rand_mat(rng, cm.dim), pb)
        # graded commutator
        com = A @ B - (-1.0) ** (pa * pb) * B @ A
        bound = 1e-12 * max(1.0, np.linalg.norm(A) * np.linalg.norm(B))
        assert abs(cstr(cm, com)) <= bound


def test_project_equivariant_is_projection():
    rng = np.random.default_rng(5)
    cm = standard_clifford_module(2, 4)
    for parity in (0, 1):
        A = cm.project_equivariant(_rand_mat(rng, cm.dim), parity)
        assert cm.supercommutes(A) <= 1e-12
        A2 = cm.project_equivariant(A, parity)
        assert np.max(np.abs(A - A2)) <= 1e-12


def test_heat_bracket_arity_zero_and_unit():
    rng = np.random.default_rng(7)
    H = _rand_psd(rng, 5, scale=2.0)
    assert np.max(np.abs(heat_bracket(H, []) - expm(-H))) <= 1e-12
    # {1}_H = e^{-H}: simplex volume one
    one = np.eye(5, dtype=complex)
    assert np.max(np.abs(heat_bracket(H, [one]) - expm(-H))) <= 1e-12


def test_heat_bracket_rejects_bad_inputs():
    rng = np.random.default_rng(9)
    H = _rand_mat(rng, 4)
    with pytest.raises(HilbertError):
        heat_bracket(H, [])
    Hpsd = _rand_psd(rng, 4)
    with pytest.raises(HilbertError):
        heat_bracket(Hpsd, [np.eye(4)] * 13)


def test_heat_bracket_vs_oracle_small():
    rng = np.random.default_rng(11)
    H = _rand_psd(rng, 4, scale=3.0)
    ops = [_rand_mat(rng, 4) for _ in range(3)]
    lhs = heat_bracket(H, ops)
    rhs = bracket_oracle(H, ops, nodes=48)
    rel = np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs)
    assert rel <= 1e-10


def test_heat_bracket_vs_simplex_quadrature():
    rng = np.random.default_rng(13)
    H = _rand_psd(rng, 3, scale=2.0)
    ops = [_rand_mat(rng, 3) for _ in range(2)]
    lhs = heat_bracket(H, ops)
    rhs = simplex_bracket_quadrature(H, ops, nodes=24)
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs) <= 1e-10


def test_bracket_duhamel_derivative():
    # d/dt expm(-(H + tB))|_0 = -{B}_H: Duhamel via the split at N=0
    rng = np.random.default_rng(15)
    H = _rand_psd(rng, 5, scale=1.5)
    B = _rand_mat(rng, 5)
    eps = 1e-6
    fd = (expm(-(H + eps * B)) - expm(-(H - eps * B))) / (2 * eps)
    assert np.max(np.abs(heat_bracket(H, [B]) + fd)) <= 1e-7


def test_insert_unit_sum_equals_plain_bracket():
    rng = np.random.default_rng(17)
    H = _rand_psd(rng, 4, scale=2.0)
    ops = [_rand_mat(rng, 4) for _ in range(2)]
    plain = heat_bracket(H, ops)
    total = sum(bracket_insert_unit(H, ops, j) for j in range(3))
    rel = np.linalg.norm(total - plain) / np.linalg.norm(plain)
    assert rel <= 1e-10


def test_insert_unit_matches_weighted_simplex_integral():
    # {A_1, .., A_j, 1, A_{j+1}, ..}_H = int (tau_{j+1} - tau_j) * (plain integrand)
    rng = np.random.default_rng(19)
    H = _rand_psd(rng, 3, scale=1.0)
    ops = [_rand_mat(rng, 3) for _ in range(2)]
    for j in range(3):
        lhs = bracket_insert_unit(H, ops, j)
        rhs = simplex_bracket_quadrature(
            H, ops, nodes=24, weight=lambda taus, _j=j: taus[_j + 1] - taus[_j]
        )
        assert np.linalg.norm(lhs - rhs) <= 1e-9


def test_insert_unit_reversal_symmetry():
    # j = 0 vs j = N under reversal + adjoint for Hermitian inputs
    rng = np.random.default_rng(21)
    H = _rand_psd(rng, 4)
    ops = [(_rand_mat(rng, 4) + _rand_mat(rng, 4).conj().T) for _ in range(2)]
    for i in range(2):
        ops[i] = 0.5 * (ops[i] + ops[i].conj().T)
    left = bracket_insert_unit(H, ops, 0)
    right = bracket_insert_unit(H, list(reversed(ops)), len(ops))
    assert np.max(np.abs(left - right.conj().T)) <= 1e-10


def test_bracket_split_identity():
    rng = np.random.default_rng(23)
    H = _rand_psd(rng, 4, scale=2.0)
    ops = [_rand_mat(rng, 4) for _ in range(2)]
    B = _rand_mat(rng, 4)
    for k in (1, 2, 3):
        merged = ops[: k - 1] + [B] + ops[k - 1 :]
        lhs = heat_bracket(H, merged)
        rhs = bracket_split_quadrature(H, ops, B, k, nodes=64)
        assert np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-30) <= 1e-8


def test_trace_norm_triangle_and_value():
    rng = np.random.default_rng(25)
    A = _rand_mat(rng, 5)
    B = _rand_mat(rng, 5)
    assert trace_norm(A + B) <= trace_norm(A) + trace_norm(B) + 1e-10
    # rank-one check: |u><v| has trace norm |u||v|
    u = rng.standard_normal(5)
    v = rng.standard_normal(5)
    assert trace_norm(np.outer(u, v)) == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v))


def test_trace_norm_bracket_bound():
    # ||{A_1..A_N}_H||_1 <= (1/N!) prod ||A_i|| Tr(e^{-H/2}) e^{1/2} at T = 1
    rng = np.random.default_rng(27)
    for _ in range(20):
        d = int(rng.integers(2, 7))
        H = _rand_psd(rng, d, scale=3.0)
        N = int(rng.integers(1, 5))
        ops = [_rand_mat(rng, d) for _ in range(N)]
        lhs = trace_norm(heat_bracket(H, ops))
        fact = 1.0
        for j in range(2, N + 1):
            fact *= j
        bound = (1.0 / fact) * np.prod([np.linalg.norm(A, 2) for A in ops])
        bound *= np.trace(expm(-H / 2)).real * np.exp(0.5)
        assert lhs <= bound * (1 + 1e-10)


@pytest.mark.parametrize("q", [0, 1, 2])
def test_cstr_cyclic_sum(q):
    rng = np.random.default_rng(29 + q)
    cm = standard_clifford_module(q, 3, 3 if q == 0 else None)
    H = cm.project_equivariant(_rand_psd(rng, cm.dim, scale=2.0), 0)
    H = 0.5 * (H + H.conj().T)
    # shift to keep PSD after projection
    wmin = np.linalg.eigvalsh(H).min()
    if wmin < 0:
        H = H - wmin * np.eye(cm.dim) * 1.0
    for _ in range(5):
        ops = [cm.project_equivariant(_rand_mat(rng, cm.dim), int(rng.integers(0, 2))) for _ in range(3)]
        res, lhs, rhs = cstr_cyclic_sum(cm, H, ops)
        scale = max(1.0, abs(rhs))
        assert res <= 1e-9 * scale


def test_cstr_cyclic_sum_single_term():
    rng = np.random.default_rng(31)
    cm = standard_clifford_module(1, 3)
    H = cm.project_equivariant(_rand_psd(rng, 6, 1.0), 0)
    H = 0.5 * (H + H.conj().T)
    H = H - min(0.0, np.linalg.eigvalsh(H).min()) * np.eye(6)
    A0 = cm.project_equivariant(_rand_mat(rng, 6), 0)
    res, lhs, rhs = cstr_cyclic_sum(cm, H, [A0])
    assert res <= 1e-10 * max(1.0, abs(rhs))
    assert rhs == pytest.approx(cstr(cm, A0 @ expm(-H)))


def test_cstr_cyclic_sum_rejects_nonequivariant():
    rng = np.random.default_rng(33)
    cm = standard_clifford_module(1, 2)
    H = np.eye(4, dtype=complex)
    with pytest.raises(HilbertError):
        cstr_cyclic_sum(cm, H, [_rand_mat(rng, 4)])


def test_chain_exp_second_superdiagonal():
    # a step-2 band contributes {C}_H exactly like a single insertion
    rng = np.random.default_rng(35)
    H = _rand_psd(rng, 3, scale=1.0)
    C = _rand_mat(rng, 3)
    out = chain_exp_topright([-H, -H, -H], {2: {0: C}})
    assert np.max(np.abs(out - heat_bracket(H, [C]))) <= 1e-12


def test_marked_chain_exp_counts_single_marker():
    # marker on the diagonal of a single node: int e^{-uH} M e^{-(1-u)H} du
    rng = np.random.default_rng(37)
    H = _rand_psd(rng, 3, scale=1.0)
    M = _rand_mat(rng, 3)
    out = marked_chain_exp_topright([-H], {}, {0: {0: M}})
    assert np.max(np.abs(out - heat_bracket(H, [M]))) <= 1e-12
