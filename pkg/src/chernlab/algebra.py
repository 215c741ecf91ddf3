"""Finite-dimensional differential graded algebras with explicit bases.

An algebra is stored through its structure constants ``mul[i, j, k]``
(coefficient of basis element k in the product e_i * e_j), an integer
degree per basis element, the index of the unit and the matrix of the
differential.  Everything downstream (chains, Chern characters, the
spectral-flow pairing) works in these coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .report import ValidationReport

TOL_ALG = 1e-12


class AlgebraError(ValueError):
    pass


def _sparse_rows(mat, tol=0.0):
    """List of (index, value) per column of a 2d array."""
    cols = []
    for j in range(mat.shape[1]):
        col = mat[:, j]
        idx = np.nonzero(np.abs(col) > tol)[0]
        cols.append([(int(i), complex(col[i])) for i in idx])
    return cols


class DgAlgebra:
    """Associative unital Z-graded algebra with a degree +1 differential."""

    def __init__(self, dim, degree, unit_index, mul, diff, name="algebra"):
        self.dim = int(dim)
        self.degree = np.asarray(degree, dtype=int)
        self.unit_index = int(unit_index)
        self.mul = np.asarray(mul, dtype=complex)
        self.diff = np.asarray(diff, dtype=complex)
        self.name = name
        if self.dim < 1:
            raise AlgebraError("dim must be >= 1")
        if self.degree.shape != (self.dim,):
            raise AlgebraError("degree vector has wrong shape")
        if self.mul.shape != (self.dim, self.dim, self.dim):
            raise AlgebraError("structure constants have wrong shape")
        if self.diff.shape != (self.dim, self.dim):
            raise AlgebraError("differential matrix has wrong shape")
        if not 0 <= self.unit_index < self.dim:
            raise AlgebraError("unit_index out of range")
        # sparse lookup tables used by the chain machinery
        self.mul_table = {}
        for i in range(self.dim):
            for j in range(self.dim):
                entries = _sparse_rows(self.mul[i, j].reshape(-1, 1))[0]
                if entries:
                    self.mul_table[(i, j)] = entries
        self.diff_table = {}
        cols = _sparse_rows(self.diff)
        for j in range(self.dim):
            if cols[j]:
                self.diff_table[j] = cols[j]
        # set by acyclic_extension: index of the adjoined odd variable
        self.sigma_index = None
        # base_dim: dimension of the algebra this one extends (if any)
        self.base_dim = None
        # optional hooks for pointwise inversion of degree-0 elements
        self.deg0_eval = None
        self.deg0_uneval = None

    # -- element helpers -------------------------------------------------

    def element(self, coeffs) -> "AlgebraElement":
        return AlgebraElement(np.asarray(coeffs, dtype=complex), self)

    def basis_element(self, i) -> "AlgebraElement":
        coeffs = np.zeros(self.dim, dtype=complex)
        coeffs[i] = 1.0
        return AlgebraElement(coeffs, self)

    @property
    def unit(self) -> "AlgebraElement":
        return self.basis_element(self.unit_index)

    def degree0_indices(self):
        return [i for i in range(self.dim) if self.degree[i] == 0]

    def multiply_coeffs(self, a, b):
        return np.einsum("i,j,ijk->k", a, b, self.mul)

    def diff_coeffs(self, a):
        return self.diff @ a

    def invert_deg0(self, a: "AlgebraElement") -> "AlgebraElement":
        """Inverse of a degree-0 element.

        Uses the pointwise hooks when available, the regular
        representation of the degree-0 subalgebra otherwise.
        """
        coeffs = a.coeffs
        nz = np.nonzero(np.abs(coeffs) > 1e-14)[0]
        if any(self.degree[i] != 0 for i in nz):
            raise AlgebraError("element is not of degree 0")
        if self.deg0_eval is not None:
            vals = self.deg0_eval(coeffs)
            if np.min(np.abs(vals)) < 1e-12:
                raise AlgebraError("degree-0 element vanishes at a point, not invertible")
            return self.element(self.deg0_uneval(1.0 / vals))
        deg0 = self.degree0_indices()
        # left multiplication by a restricted to the degree-0 subalgebra
        L = np.einsum("i,ijk->kj", coeffs[deg0], self.mul[np.ix_(deg0, deg0, deg0)])
        rhs = np.zeros(len(deg0), dtype=complex)
        rhs[deg0.index(self.unit_index)] = 1.0
        try:
            sol = np.linalg.solve(L, rhs)
        except np.linalg.LinAlgError as exc:
            raise AlgebraError("degree-0 element is not invertible") from exc
        out = np.zeros(self.dim, dtype=complex)
        out[deg0] = sol
        inv = self.element(out)
        check = (a * inv).coeffs - self.unit.coeffs
        check2 = (inv * a).coeffs - self.unit.coeffs
        if max(np.max(np.abs(check)), np.max(np.abs(check2))) > 1e-9:
            raise AlgebraError("degree-0 element has no two-sided inverse")
        return inv

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        mul_triplets = []
        for i in range(self.dim):
            for j in range(self.dim):
                for k, v in self.mul_table.get((i, j), []):
                    mul_triplets.append([i, j, k, v.real, v.imag])
        diff_triplets = []
        for j, entries in sorted(self.diff_table.items()):
            for i, v in entries:
                diff_triplets.append([i, j, v.real, v.imag])
        return {
            "name": self.name,
            "dim": self.dim,
            "degrees": [int(d) for d in self.degree],
            "unit_index": self.unit_index,
            "mul": mul_triplets,
            "diff": diff_triplets,
        }

    @classmethod
    def from_json_dict(cls, data) -> "DgAlgebra":
        dim = int(data["dim"])
        mul = np.zeros((dim, dim, dim), dtype=complex)
        for i, j, k, re, im in data["mul"]:
            mul[int(i), int(j), int(k)] = re + 1j * im
        diff = np.zeros((dim, dim), dtype=complex)
        for i, j, re, im in data["diff"]:
            diff[int(i), int(j)] = re + 1j * im
        return cls(dim, data["degrees"], data["unit_index"], mul, diff, name=data.get("name", "algebra"))

    def __repr__(self):
        return f"DgAlgebra({self.name!r}, dim={self.dim})"


@dataclass
class AlgebraElement:
    """Element of a DgAlgebra, stored as a coefficient vector."""

    coeffs: np.ndarray
    parent: DgAlgebra

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.parent.dim,):
            raise AlgebraError("coefficient vector has wrong length")

    def __add__(self, other):
        return AlgebraElement(self.coeffs + other.coeffs, self.parent)

    def __sub__(self, other):
        return AlgebraElement(self.coeffs - other.coeffs, self.parent)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return AlgebraElement(self.parent.multiply_coeffs(self.coeffs, other.coeffs), self.parent)
        return AlgebraElement(self.coeffs * complex(other), self.parent)

    def __rmul__(self, scalar):
        return AlgebraElement(self.coeffs * complex(scalar), self.parent)

    def __neg__(self):
        return AlgebraElement(-self.coeffs, self.parent)

    def d(self) -> "AlgebraElement":
        return AlgebraElement(self.parent.diff_coeffs(self.coeffs), self.parent)

    def homogeneous_part(self, degree) -> "AlgebraElement":
        mask = (self.parent.degree == degree).astype(complex)
        return AlgebraElement(self.coeffs * mask, self.parent)

    def degrees_present(self):
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return sorted({int(self.parent.degree[i]) for i in nz})

    def is_homogeneous(self):
        return len(self.degrees_present()) <= 1

    def norm(self) -> float:
        """Designated seminorm: max absolute basis coefficient."""
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def __repr__(self):
        return f"AlgebraElement({self.coeffs!r})"


def dga_validate(alg: DgAlgebra, tol: float = TOL_ALG, max_exhaustive_dim: int = 48, seed: int = 0) -> ValidationReport:
    """Check associativity, unit laws, grading, d^2 = 0 and graded Leibniz.

    Associativity and Leibniz are checked exhaustively for dim <=
    max_exhaustive_dim and on seeded random triples beyond that (the
    report notes which mode was used).
    """
    rep = ValidationReport(f"dga:{alg.name}")
    mul, diff, deg = alg.mul, alg.diff, alg.degree
    dim, u = alg.dim, alg.unit_index

    exhaustive = dim <= max_exhaustive_dim
    if exhaustive:
        lhs = np.einsum("ijk,klm->ijlm", mul, mul)
        rhs = np.einsum("jlk,ikm->ijlm", mul, mul)
        assoc = np.max(np.abs(lhs - rhs), initial=0.0)
    else:
        rng = np.random.default_rng(seed)
        assoc = 0.0
        for _ in range(2000):
            i, j, l = rng.integers(0, dim, size=3)
            lhs_v = np.einsum("k,klm->lm", mul[i, j], mul)[l]
            rhs_v = np.einsum("k,km->m", mul[j, l], mul[i])
            assoc = max(assoc, float(np.max(np.abs(lhs_v - rhs_v))))
    rep.add("associativity", assoc, tol, "(e_i e_j) e_l = e_i (e_j e_l)",
            note="exhaustive" if exhaustive else "sampled")

    unit_res = max(
        float(np.max(np.abs(mul[u] - np.eye(dim)))),
        float(np.max(np.abs(mul[:, u, :] - np.eye(dim)))),
    )
    rep.add("unit-laws", unit_res, tol, "1*e_j = e_j = e_j*1")

    deg_sum = deg[:, None, None] + deg[None, :, None]
    bad_mul = np.where(deg[None, None, :] != deg_sum, np.abs(mul), 0.0)
    rep.add("grading-product", float(np.max(bad_mul, initial=0.0)), tol, "deg(e_i e_j) = deg(e_i) + deg(e_j)")

    bad_diff = np.where(deg[:, None] != deg[None, :] + 1, np.abs(diff), 0.0)
    rep.add("grading-differential", float(np.max(bad_diff, initial=0.0)), tol, "d raises degree by one")

    rep.add("unit-differential", float(np.max(np.abs(diff[:, u]), initial=0.0)), tol, "d(1) = 0")
    rep.add("d-squared", float(np.max(np.abs(diff @ diff), initial=0.0)), tol, "d(d(a)) = 0")

    if exhaustive:
        dprod = np.einsum("ijk,lk->ijl", mul, diff)
        da_b = np.einsum("pi,pjl->ijl", diff, mul)
        sign = (-1.0) ** (deg % 2)
        a_db = np.einsum("i,pj,ipl->ijl", sign, diff, mul)
        leib = float(np.max(np.abs(dprod - da_b - a_db), initial=0.0))
        note = "exhaustive"
    else:
        rng = np.random.default_rng(seed + 1)
        leib = 0.0
        for _ in range(2000):
            i, j = rng.integers(0, dim, size=2)
            dprod_v = diff @ mul[i, j]
            da_b_v = np.einsum("p,pjl->l", diff[:, i], mul[:, j, :])
            a_db_v = (-1.0) ** (deg[i] % 2) * np.einsum("p,pl->l", diff[:, j], mul[i])
            leib = max(leib, float(np.max(np.abs(dprod_v - da_b_v - a_db_v))))
        note = "sampled"
    rep.add("graded-leibniz", leib, tol, "d(ab) = (da)b + (-1)^|a| a db", note=note)
    return rep


def acyclic_extension(alg: DgAlgebra) -> DgAlgebra:
    """Adjoin an odd square-zero variable s with differential d - iota.

    Basis: the original e_i at indices 0..dim-1 followed by s*e_i at
    dim..2*dim-1.  The new variable is s*1 at index dim + unit_index,
    it has degree -1, squares to zero and supercommutes with the base.
    """
    dim = alg.dim
    dim2 = 2 * dim
    deg2 = np.concatenate([alg.degree, alg.degree - 1])
    mul2 = np.zeros((dim2, dim2, dim2), dtype=complex)
    sign = (-1.0) ** (alg.degree % 2)
    # plain * plain, plain * (s b) = (-1)^|a| s(ab), (s a) * plain = s(ab)
    mul2[:dim, :dim, :dim] = alg.mul
    mul2[:dim, dim:, dim:] = np.einsum("i,ijk->ijk", sign, alg.mul)
    mul2[dim:, :dim, dim:] = alg.mul
    diff2 = np.zeros((dim2, dim2), dtype=complex)
    diff2[:dim, :dim] = alg.diff
    # d_T(s b) = -s db - b
    diff2[dim:, dim:] = -alg.diff
    diff2[:dim, dim:] = -np.eye(dim)
    out = DgAlgebra(dim2, deg2, alg.unit_index, mul2, diff2, name=alg.name + "_T")
    out.sigma_index = dim + alg.unit_index
    out.base_dim = dim
    if alg.deg0_eval is not None:
        # degree-0 part of the extension containing the base degree-0 part;
        # pointwise hooks only make sense on base coefficients
        def ev(coeffs, _alg=alg):
            return _alg.deg0_eval(coeffs[:dim])

        def unev(values, _alg=alg):
            out_c = np.zeros(dim2, dtype=complex)
            out_c[:dim] = _alg.deg0_uneval(values)
            return out_c

        out.deg0_eval = ev
        out.deg0_uneval = unev
    return out


def _matrix_unit_basis(m):
    """Basis of Mat_m(C) whose first element is the identity."""
    mats = [np.eye(m, dtype=complex)]
    for p in range(m):
        for q in range(m):
            if p != q:
                e = np.zeros((m, m), dtype=complex)
                e[p, q] = 1.0
                mats.append(e)
    for p in range(1, m):
        e = np.zeros((m, m), dtype=complex)
        e[p, p] = 1.0
        e[0, 0] = -1.0
        mats.append(e)
    return mats


def mat_lift(alg: DgAlgebra, m: int) -> DgAlgebra:
    """Mat_m(alg) as a DgAlgebra of dimension m^2 * dim with entrywise d."""
    if m < 1:
        raise AlgebraError("matrix size must be >= 1")
    if m == 1:
        out = DgAlgebra(alg.dim, alg.degree, alg.unit_index, alg.mul, alg.diff, name=f"Mat1({alg.name})")
        out.sigma_index = alg.sigma_index
        out.base_dim = alg.base_dim
        return out
    mats = _matrix_unit_basis(m)
    mm = len(mats)
    flat = np.stack([b.reshape(-1) for b in mats], axis=1)  # (m*m, mm)
    flat_inv = np.linalg.inv(flat)
    # structure constants of Mat_m(C) in this basis
    cmat = np.zeros((mm, mm, mm), dtype=complex)
    for a in range(mm):
        for b in range(mm):
            prod = (mats[a] @ mats[b]).reshape(-1)
            cmat[a, b] = flat_inv @ prod
    dim = alg.dim
    dim_out = mm * dim
    mul_out = np.einsum("abc,ijk->aibjck", cmat, alg.mul).reshape(dim_out, dim_out, dim_out)
    deg_out = np.tile(alg.degree, mm).reshape(mm, dim).reshape(-1)
    diff_out = np.kron(np.eye(mm), alg.diff)
    out = DgAlgebra(dim_out, deg_out, alg.unit_index, mul_out, diff_out, name=f"Mat{m}({alg.name})")
    out._mat_basis = mats
    out._mat_flat_inv = flat_inv
    out._mat_base_alg = alg
    return out


class MatrixElement:
    """m x m matrix with entries in a common DgAlgebra."""

    def __init__(self, entries, alg: DgAlgebra):
        self.entries = np.asarray(entries, dtype=complex)
        if self.entries.ndim != 3 or self.entries.shape[0] != self.entries.shape[1]:
            raise AlgebraError("entries must have shape (m, m, dim)")
        if self.entries.shape[2] != alg.dim:
            raise AlgebraError("entry length does not match the algebra dimension")
        self.alg = alg
        self.m = self.entries.shape[0]

    @classmethod
    def from_scalar_matrix(cls, mat, alg: DgAlgebra):
        mat = np.asarray(mat, dtype=complex)
        m = mat.shape[0]
        entries = np.zeros((m, m, alg.dim), dtype=complex)
        entries[:, :, alg.unit_index] = mat
        return cls(entries, alg)

    @classmethod
    def identity(cls, m, alg: DgAlgebra):
        return cls.from_scalar_matrix(np.eye(m), alg)

    def __add__(self, other):
        return MatrixElement(self.entries + other.entries, self.alg)

    def __sub__(self, other):
        return MatrixElement(self.entries - other.entries, self.alg)

    def __neg__(self):
        return MatrixElement(-self.entries, self.alg)

    def scale(self, scalar):
        return MatrixElement(self.entries * complex(scalar), self.alg)

    def left_mult_element(self, a: AlgebraElement):
        out = np.einsum("i,pqj,ijk->pqk", a.coeffs, self.entries, self.alg.mul)
        return MatrixElement(out, self.alg)

    def __matmul__(self, other):
        if self.m != other.m:
            raise AlgebraError("matrix sizes differ")
        out = np.einsum("pri,rqj,ijk->pqk", self.entries, other.entries, self.alg.mul)
        return MatrixElement(out, self.alg)

    def d(self):
        return MatrixElement(np.einsum("ki,pqi->pqk", self.alg.diff, self.entries), self.alg)

    def entry(self, p, q) -> AlgebraElement:
        return AlgebraElement(self.entries[p, q], self.alg)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.entries), initial=0.0))

    def is_degree(self, k) -> bool:
        mask = self.alg.degree != k
        return float(np.max(np.abs(self.entries[:, :, mask]), initial=0.0)) <= 1e-13

    def degrees_present(self):
        degs = set()
        for p in range(self.m):
            for q in range(self.m):
                degs.update(self.entry(p, q).degrees_present())
        return sorted(degs)

    def homogeneous_part(self, degree):
        mask = (self.alg.degree == degree).astype(complex)
        return MatrixElement(self.entries * mask[None, None, :], self.alg)

    def inverse_deg0(self) -> "MatrixElement":
        """Inverse of a degree-0 matrix.

        Pointwise inversion through the algebra's evaluation hooks when
        present; otherwise a linear solve in the regular representation
        of Mat_m of the degree-0 subalgebra.
        """
        if not self.is_degree(0):
            raise AlgebraError("matrix has entries of nonzero degree")
        alg = self.alg
        if alg.deg0_eval is not None:
            probe = alg.deg0_eval(np.zeros(alg.dim, dtype=complex))
            npts = len(probe)
            vals = np.zeros((npts, self.m, self.m), dtype=complex)
            for p in range(self.m):
                for q in range(self.m):
                    vals[:, p, q] = alg.deg0_eval(self.entries[p, q])
            try:
                inv_vals = np.linalg.inv(vals)
            except np.linalg.LinAlgError as exc:
                raise AlgebraError("matrix not invertible at some point") from exc
            out = np.zeros_like(self.entries)
            for p in range(self.m):
                for q in range(self.m):
                    out[p, q] = alg.deg0_uneval(inv_vals[:, p, q])
            return MatrixElement(out, alg)
        deg0 = alg.degree0_indices()
        n0 = len(deg0)
        m = self.m
        unit0 = deg0.index(alg.unit_index)
        # left multiplication by X on Mat_m(degree-0 part):
        # (X Y)_{p s, k} = sum_{r, i, j} X_{p r, i} mul0[i, j, k] Y_{r s, j}
        mul0 = alg.mul[np.ix_(deg0, deg0, deg0)]
        X = self.entries[:, :, deg0]
        K = np.einsum("pri,ijk->prjk", X, mul0)
        big = np.zeros((m, m, n0, m, m, n0), dtype=complex)
        for s in range(m):
            big[:, s, :, :, s, :] = K.transpose(0, 3, 1, 2)  # [p, k, r, j]
        big = big.reshape(m * m * n0, m * m * n0)
        rhs = np.zeros((m, m, n0), dtype=complex)
        for p in range(m):
            rhs[p, p, unit0] = 1.0
        try:
            sol = np.linalg.solve(big, rhs.reshape(-1)).reshape(m, m, n0)
        except np.linalg.LinAlgError as exc:
            raise AlgebraError("matrix not invertible") from exc
        out = np.zeros_like(self.entries)
        out[:, :, deg0] = sol
        inv = MatrixElement(out, alg)
        resid = max((inv @ self - MatrixElement.identity(m, alg)).max_norm(),
                    (self @ inv - MatrixElement.identity(m, alg)).max_norm())
        if resid > 1e-9:
            raise AlgebraError("matrix has no two-sided inverse")
        return inv

    def __repr__(self):
        return f"MatrixElement(m={self.m}, alg={self.alg.name!r})"


def maurer_cartan(g: MatrixElement, g_inv: MatrixElement | None = None) -> MatrixElement:
    """omega = g^{-1} dg for an invertible degree-0 matrix g."""
    if not g.is_degree(0):
        raise AlgebraError("maurer_cartan requires a degree-0 matrix")
    if g_inv is None:
        g_inv = g.inverse_deg0()
    resid = (g_inv @ g - MatrixElement.identity(g.m, g.alg)).max_norm()
    if resid > 1e-8:
        raise AlgebraError(f"supplied inverse fails g^-1 g = 1 (residual {resid:.2e})")
    return g_inv @ g.d()


def maurer_cartan_residual(omega: MatrixElement) -> float:
    """Max-norm of d(omega) + omega^2 (zero for a Maurer-Cartan form)."""
    return (omega.d() + omega @ omega).max_norm()
