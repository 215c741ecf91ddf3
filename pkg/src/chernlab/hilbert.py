"""Graded Hilbert spaces, Clifford actions, supertraces and simplex heat
brackets.

The bracket {A_1, ..., A_N}_H is the integral of
e^{-t1 H} A_1 e^{-(t2-t1) H} ... A_N e^{-(1-tN) H} over the ordered
simplex 0 <= t1 <= ... <= tN <= 1.  The primary evaluator embeds the
factors into an augmented block matrix whose exponential carries the
integral in its top-right block (exact up to the expm kernel); an
independent Gauss-Legendre recursion serves as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm

from .report import ValidationReport

N_BRACKET_MAX = 12


class HilbertError(ValueError):
    pass


def gauss_legendre_01(nodes):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(int(nodes))
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass
class GradedHilbert:
    """Finite-dimensional Z2-graded Hilbert space."""

    parity: np.ndarray  # +1 / -1 per basis vector

    def __post_init__(self):
        self.parity = np.asarray(self.parity, dtype=int)
        if not np.all(np.abs(self.parity) == 1):
            raise HilbertError("parity entries must be +1 or -1")

    @property
    def dim(self):
        return len(self.parity)

    @property
    def gamma_grading(self) -> np.ndarray:
        return np.diag(self.parity.astype(complex))

    def operator_parity(self, A, tol=1e-12):
        """0 (even), 1 (odd) or None if mixed."""
        G = self.parity.astype(float)
        even_res = np.max(np.abs(A - (G[:, None] * A * G[None, :])))
        odd_res = np.max(np.abs(A + (G[:, None] * A * G[None, :])))
        scale = max(1.0, float(np.max(np.abs(A))))
        if even_res <= tol * scale:
            return 0
        if odd_res <= tol * scale:
            return 1
        return None


def _clifford_pair(p):
    """e_1, e_2 on C^2 tensor C^p in the diag(1,-1) grading."""
    e1 = np.kron(np.array([[0, 1], [-1, 0]], dtype=complex), np.eye(p))
    e2 = np.kron(np.array([[0, 1j], [1j, 0]], dtype=complex), np.eye(p))
    return e1, e2


def standard_clifford_module(q, p_plus, p_minus=None):
    """A Clifford module on a graded space of balanced block size.

    q = 0: grading (p_plus, p_minus), no generators.  q >= 1 requires a
    balanced space; generators act blockwise as the standard pair.
    """
    if q == 0:
        p_minus = p_plus if p_minus is None else p_minus
        parity = np.array([1] * p_plus + [-1] * p_minus)
        return CliffordModule(GradedHilbert(parity), 0, [])
    p = p_plus
    parity = np.array([1] * p + [-1] * p)
    e1, e2 = _clifford_pair(p)
    gens = [e1, e2][:q]
    if q > 2:
        raise HilbertError("generators beyond q = 2 are not implemented")
    return CliffordModule(GradedHilbert(parity), q, gens)


@dataclass
class CliffordModule:
    """Graded Hilbert space with an action of the complex Clifford algebra."""

    H: GradedHilbert
    q: int
    e: list

    def __post_init__(self):
        self.e = [np.asarray(m, dtype=complex) for m in self.e]
        if len(self.e) != self.q:
            raise HilbertError("need exactly q generator matrices")
        for m in self.e:
            if m.shape != (self.H.dim, self.H.dim):
                raise HilbertError("generator has wrong shape")

    @property
    def dim(self):
        return self.H.dim

    def volume_element(self) -> np.ndarray:
        out = np.eye(self.dim, dtype=complex)
        for m in self.e:
            out = out @ m
        return out

    def supercommutes(self, A, tol=1e-12) -> float:
        """Max residual of the supercommutators [e_i, A] (graded)."""
        par = self.H.operator_parity(A, tol=1e-9)
        if par is None:
            raise HilbertError("operator has no pure parity")
        res = 0.0
        for m in self.e:
            sign = (-1.0) ** par  # e_i odd
            res = max(res, float(np.max(np.abs(m @ A - sign * A @ m), initial=0.0)))
        return res

    def project_equivariant(self, A, parity) -> np.ndarray:
        """Project onto operators of given parity supercommuting with C_q.

        The graded commutation [e_i, A] = 0 reads e_i A e_i^{-1} = A for
        even A and = -A for odd A; the per-generator conjugations commute,
        so one sequential pass projects exactly.
        """
        G = self.H.parity.astype(float)
        if parity == 0:
            A = 0.5 * (A + G[:, None] * A * G[None, :])
        else:
            A = 0.5 * (A - G[:, None] * A * G[None, :])
        sign = (-1.0) ** parity
        for m in self.e:
            A = 0.5 * (A - sign * (m @ A @ m))
        return A


def clifford_validate(cm: CliffordModule, tol=1e-12) -> ValidationReport:
    """Relations e_i e_j + e_j e_i = -2 delta_ij, skew-adjointness, oddness."""
    rep = ValidationReport(f"clifford:q={cm.q},dim={cm.dim}")
    d = cm.dim
    rel = 0.0
    for i, ei in enumerate(cm.e):
        for j, ej in enumerate(cm.e):
            target = -2.0 * np.eye(d) if i == j else np.zeros((d, d))
            rel = max(rel, float(np.max(np.abs(ei @ ej + ej @ ei - target), initial=0.0)))
    rep.add("clifford-relations", rel, tol, "e_i e_j + e_j e_i = -2 delta_ij")
    skew = max((float(np.max(np.abs(m.conj().T + m))) for m in cm.e), default=0.0)
    rep.add("skew-adjoint", skew, tol, "e_i* = -e_i")
    G = cm.H.parity.astype(float)
    odd = max((float(np.max(np.abs(m + G[:, None] * m * G[None, :]))) for m in cm.e), default=0.0)
    rep.add("generators-odd", odd, tol, "e_i anticommutes with the grading")
    gsq = float(np.max(np.abs(cm.H.gamma_grading @ cm.H.gamma_grading - np.eye(d))))
    rep.add("grading-involution", gsq, tol, "grading squares to one")
    return rep


def supertrace(H: GradedHilbert, A) -> complex:
    """Str(A) = Tr(grading * A)."""
    return complex(np.sum(H.parity * np.diagonal(A)))


def cstr(cm: CliffordModule, A) -> complex:
    """Clifford supertrace 2^{-q} Str(gamma A), gamma the volume element."""
    return complex(2.0 ** (-cm.q) * supertrace(cm.H, cm.volume_element() @ A))


def trace_norm(A) -> float:
    """Schatten-1 norm via singular values."""
    return float(np.sum(np.linalg.svd(A, compute_uv=False)))


# -- block-exponential kernels ---------------------------------------------------


def chain_exp_topright(diag, bands, ncopies_dim=None):
    """Top-right block of expm of a block upper-banded matrix.

    diag: list of K+1 diagonal blocks.  bands: dict mapping a step size
    s >= 1 to a dict {j: block} placing a block from node j to node j+s
    (nodes 0-based).  Returns expm(G)[0:d, K*d:(K+1)*d].
    """
    K = len(diag) - 1
    d = diag[0].shape[0]
    G = np.zeros(((K + 1) * d, (K + 1) * d), dtype=complex)
    for j, Dj in enumerate(diag):
        G[j * d : (j + 1) * d, j * d : (j + 1) * d] = Dj
    for step, placed in bands.items():
        for j, block in placed.items():
            if block is None:
                continue
            G[j * d : (j + 1) * d, (j + step) * d : (j + step + 1) * d] = block
    E = expm(G)
    return E[0:d, K * d : (K + 1) * d]


def marked_chain_exp_topright(diag, bands, marked):
    """Sum over paths carrying exactly one marked step.

    Same layout as chain_exp_topright; marked maps step sizes (0 allowed)
    to {j: block}.  Uses the two-copy augmentation [[G, M], [0, G]].
    """
    K = len(diag) - 1
    d = diag[0].shape[0]
    n = (K + 1) * d
    G = np.zeros((n, n), dtype=complex)
    for j, Dj in enumerate(diag):
        G[j * d : (j + 1) * d, j * d : (j + 1) * d] = Dj
    for step, placed in bands.items():
        for j, block in placed.items():
            if block is None:
                continue
            G[j * d : (j + 1) * d, (j + step) * d : (j + step + 1) * d] = block
    M = np.zeros((n, n), dtype=complex)
    for step, placed in marked.items():
        for j, block in placed.items():
            if block is None:
                continue
            M[j * d : (j + 1) * d, (j + step) * d : (j + step + 1) * d] = block
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[:n, :n] = G
    big[:n, n:] = M
    big[n:, n:] = G
    E = expm(big)
    return E[0:d, n + K * d : n + (K + 1) * d]


def heat_bracket(H, A_list, check=True, n_max=N_BRACKET_MAX):
    """Simplex heat bracket via the augmented block exponential."""
    H = np.asarray(H, dtype=complex)
    A_list = [np.asarray(A, dtype=complex) for A in A_list]
    N = len(A_list)
    if N > n_max:
        raise HilbertError(f"bracket arity {N} exceeds the bound {n_max}")
    if check:
        if np.max(np.abs(H - H.conj().T)) > 1e-10 * max(1.0, float(np.max(np.abs(H)))):
            raise HilbertError("H must be Hermitian")
        w = np.linalg.eigvalsh(H)
        if w.min() < -1e-10 * max(1.0, abs(w.max())):
            raise HilbertError("H must be positive semidefinite")
    if N == 0:
        return expm(-H)
    diag = [-H] * (N + 1)
    bands = {1: {j: A_list[j] for j in range(N)}}
    return chain_exp_topright(diag, bands)


def bracket_oracle(H, A_list, nodes=64, deep_nodes=16):
    """Gauss-Legendre recursion for the bracket, independent of expm.

    Uses {A_1, ..., A_N}_{cH} = int_0^1 (1-u)^{N-1} e^{-u c H} A_1
    {A_2, ..., A_N}_{(1-u) c H} du and a single eigendecomposition of H.
    The outermost integral uses the requested node count; deeper levels
    use deep_nodes (the integrands are entire, so accuracy stays far
    below the cross-check tolerance while the batch stays bounded).
    """
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    w_eig, V = np.linalg.eigh(H)
    # work in the eigenbasis: heat factors are diagonal scalings there
    ops_e = [V.conj().T @ np.asarray(A, dtype=complex) @ V for A in A_list]
    rules = [gauss_legendre_01(nodes)] + [gauss_legendre_01(deep_nodes)] * max(0, len(A_list) - 1)

    def rec(scales, ops, level):
        # returns {ops}_{c H} in the eigenbasis for every scale c,
        # shape (len(scales), d, d); arity zero is the diagonal heat
        if not ops:
            out = np.zeros((len(scales), d, d), dtype=complex)
            idx = np.arange(d)
            out[:, idx, idx] = np.exp(-np.outer(scales, w_eig))
            return out
        n_ops = len(ops)
        u, w = rules[level]
        child_scales = np.multiply.outer(scales, 1.0 - u).reshape(-1)
        inner = rec(child_scales, ops[1:], level + 1)
        inner = ops[0] @ inner  # (B*nodes, d, d)
        inner = inner.reshape(len(scales), len(u), d, d)
        front = np.exp(-np.multiply.outer(scales, u)[:, :, None] * w_eig[None, None, :])
        weight = w * (1.0 - u) ** (n_ops - 1)
        return np.einsum("n,bni,bnil->bil", weight, front, inner, optimize=True)

    out = rec(np.array([1.0]), ops_e, 0)[0]
    return V @ out @ V.conj().T


def simplex_bracket_quadrature(H, A_list, nodes=16, weight=None):
    """Iterated Gauss-Legendre quadrature straight over the simplex.

    Intended for small arities in tests.  weight(tau_ext) multiplies the
    integrand; tau_ext = (0, tau_1, ..., tau_N, 1).
    """
    H = np.asarray(H, dtype=complex)
    N = len(A_list)
    if N == 0:
        return expm(-H)
    w_eig, V = np.linalg.eigh(H)

    def heat(t):
        return (V * np.exp(-t * w_eig)) @ V.conj().T

    x, w = gauss_legendre_01(nodes)
    out = np.zeros_like(H)

    def rec(k, lo, taus, acc_weight):
        nonlocal out
        # tau_k runs over [lo, 1]; map GL nodes onto it
        span = 1.0 - lo
        for xi, wi in zip(x, w):
            tk = lo + span * xi
            new = taus + [tk]
            if k == N:
                taus_ext = [0.0] + new + [1.0]
                val = heat(new[0])
                for idx, A in enumerate(A_list):
                    val = val @ A @ heat(taus_ext[idx + 2] - taus_ext[idx + 1])
                wgt = acc_weight * wi * span
                if weight is not None:
                    wgt *= weight(taus_ext)
                out += wgt * val
            else:
                rec(k + 1, tk, new, acc_weight * wi * span)

    rec(1, 0.0, [], 1.0)
    return out


def bracket_insert_unit(H, A_list, j, check=True):
    """{A_1, ..., A_j, 1, A_(j+1), ..., A_N}_H."""
    ops = list(A_list)
    d = H.shape[0]
    ops.insert(j, np.eye(d, dtype=complex))
    return heat_bracket(H, ops, check=check)


def bracket_split_quadrature(H, A_list, B, k, nodes=64):
    """Right-hand side of the split identity, by u-quadrature:

    int_0^1 u^{k-1} (1-u)^{N-(k-1)} {A_1..A_{k-1}}_{uH} B {A_k..A_N}_{(1-u)H} du
    """
    H = np.asarray(H, dtype=complex)
    N = len(A_list)
    left, right = A_list[: k - 1], A_list[k - 1 :]
    u, w = gauss_legendre_01(nodes)
    out = np.zeros_like(H)
    for ui, wi in zip(u, w):
        lhs = heat_bracket(ui * H, left, check=False)
        rhs = heat_bracket((1.0 - ui) * H, right, check=False)
        out += wi * ui ** (k - 1) * (1.0 - ui) ** (N - (k - 1)) * (lhs @ B @ rhs)
    return out


def cstr_cyclic_sum(cm: CliffordModule, H, A_list, tol_equiv=1e-10):
    """Residual of the rotation identity for the Clifford supertrace.

    A_list = [A_0, ..., A_N]; all inputs must supercommute with the
    Clifford action.  Returns |sum_j (-1)^{k_j} CStr({A_{j+1}, ..., A_j}_H)
    - CStr(A_0 {A_1, ..., A_N}_H)| together with the two values.
    """
    H = np.asarray(H, dtype=complex)
    A_list = [np.asarray(A, dtype=complex) for A in A_list]
    parities = []
    for A in A_list:
        p = cm.H.operator_parity(A, tol=1e-9)
        if p is None:
            raise HilbertError("inputs must have pure parity")
        scale = max(1.0, float(np.max(np.abs(A))))
        if cm.supercommutes(A) > tol_equiv * scale:
            raise HilbertError("inputs must supercommute with the Clifford action")
        parities.append(p)
    if cm.H.operator_parity(H, tol=1e-9) != 0:
        raise HilbertError("H must be even")
    N = len(A_list) - 1
    rhs = cstr(cm, A_list[0] @ heat_bracket(H, A_list[1:], check=False))
    lhs = 0.0 + 0.0j
    for j in range(N + 1):
        kj = (sum(parities[: j + 1]) * sum(parities[j + 1 :])) % 2
        rotated = A_list[j + 1 :] + A_list[: j + 1]
        lhs += (-1.0) ** kj * cstr(cm, heat_bracket(H, rotated, check=False))
    return abs(lhs - rhs), lhs, rhs
