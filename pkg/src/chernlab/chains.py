"""Chains in the reduced cyclic complex and the bar complex.

Chains are finite linear combinations of basis words.  A cyclic word
(theta_0, ..., theta_N) is a tuple of N+1 basis indices whose slots
>= 1 live in the quotient by the span of the unit (any component on the
unit is projected out when a term is inserted).  A bar word is a tuple
of N basis indices, reduced in every slot for the "bar_red" kind and
unreduced for "bar".

Sign conventions: with m_k = |theta_0| + ... + |theta_k| - k (and
m_{-1} = 1) and n_k = |theta_1| + ... + |theta_k| - k,

  d  (cyclic)  = - sum_k (-1)^{m_{k-1}} (..., d theta_k, ...)
  b  (cyclic)  = - sum_{k<N} (-1)^{m_k} (..., theta_k theta_{k+1}, ...)
                 + (-1)^{(|theta_N|-1) m_{N-1}} (theta_N theta_0, ...)
  B  (cyclic)  = sum_k (-1)^{(m_{k-1}+1)(m_N - m_{k-1})}
                 (1, theta_k, ..., theta_{k-1})
  d  (bar)     = - sum_k (-1)^{n_{k-1}} (..., d theta_k, ...)
  b' (bar)     = - sum_{k<N} (-1)^{n_k} (..., theta_k theta_{k+1}, ...)

plus the rotation operator N with signs (-1)^{n_k (n_N - n_k)} and the
Chen normalization operators S, R, S_i^(f), T_i^(f).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, DgAlgebra

CYCLIC = "cyclic"
BAR = "bar"
BAR_RED = "bar_red"


class ChainError(ValueError):
    pass


class Chain:
    """Finite linear combination of basis words over one algebra."""

    __slots__ = ("alg", "kind", "terms")

    def __init__(self, alg: DgAlgebra, kind: str, terms=None):
        if kind not in (CYCLIC, BAR, BAR_RED):
            raise ChainError(f"unknown chain kind {kind!r}")
        self.alg = alg
        self.kind = kind
        self.terms: dict[tuple, complex] = {}
        if terms:
            for word, coeff in terms.items() if isinstance(terms, dict) else terms:
                self.add_term(word, coeff)

    # -- construction ------------------------------------------------------

    def _reduced_positions(self, word):
        if self.kind == CYCLIC:
            return range(1, len(word))
        if self.kind == BAR_RED:
            return range(len(word))
        return ()

    def add_term(self, word, coeff):
        """Insert one word; components on the unit in reduced slots die."""
        word = tuple(int(i) for i in word)
        u = self.alg.unit_index
        for p in self._reduced_positions(word):
            if word[p] == u:
                return
        if coeff == 0:
            return
        new = self.terms.get(word, 0.0) + coeff
        if new == 0:
            self.terms.pop(word, None)
        else:
            self.terms[word] = new

    @classmethod
    def basis_word(cls, alg, kind, word, coeff=1.0):
        c = cls(alg, kind)
        c.add_term(word, coeff)
        return c

    @classmethod
    def from_elements(cls, alg, kind, slots, coeff=1.0, tol=0.0):
        """Expand a tensor word of AlgebraElements into basis words."""
        c = cls(alg, kind)
        words = [((), coeff)]
        for el in slots:
            vec = el.coeffs if isinstance(el, AlgebraElement) else np.asarray(el, dtype=complex)
            nz = np.nonzero(np.abs(vec) > tol)[0]
            words = [(w + (int(i),), cf * vec[i]) for w, cf in words for i in nz]
        for w, cf in words:
            c.add_term(w, cf)
        return c

    def copy(self):
        out = Chain(self.alg, self.kind)
        out.terms = dict(self.terms)
        return out

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        self._check_compatible(other)
        out = self.copy()
        for w, cf in other.terms.items():
            out.add_term(w, cf)
        return out

    def __sub__(self, other):
        self._check_compatible(other)
        out = self.copy()
        for w, cf in other.terms.items():
            out.add_term(w, -cf)
        return out

    def scale(self, scalar):
        out = Chain(self.alg, self.kind)
        scalar = complex(scalar)
        if scalar != 0:
            out.terms = {w: cf * scalar for w, cf in self.terms.items()}
        return out

    def _check_compatible(self, other):
        if self.alg is not other.alg or self.kind != other.kind:
            raise ChainError("chains live over different algebras or kinds")

    def norm(self) -> float:
        """Euclidean norm in word coordinates."""
        if not self.terms:
            return 0.0
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def prune(self, tol=0.0):
        out = Chain(self.alg, self.kind)
        out.terms = {w: c for w, c in self.terms.items() if abs(c) > tol}
        return out

    def component(self, N) -> "Chain":
        """Sub-chain of words with N slots beyond slot 0 (or N bar slots)."""
        length = N + 1 if self.kind == CYCLIC else N
        out = Chain(self.alg, self.kind)
        out.terms = {w: c for w, c in self.terms.items() if len(w) == length}
        return out

    def components_present(self):
        off = 1 if self.kind == CYCLIC else 0
        return sorted({len(w) - off for w in self.terms})

    # -- grading ------------------------------------------------------------

    def word_parity(self, word) -> int:
        deg = self.alg.degree
        n_slots = len(word) - 1 if self.kind == CYCLIC else len(word)
        return int(sum(int(deg[i]) for i in word) - n_slots) % 2

    def parity(self):
        """0 or 1 when homogeneous, raises otherwise."""
        parities = {self.word_parity(w) for w in self.terms}
        if len(parities) > 1:
            raise ChainError("chain is not Z2-homogeneous")
        return parities.pop() if parities else 0

    def __repr__(self):
        return f"Chain({self.kind}, {len(self.terms)} terms over {self.alg.name!r})"


# -- degree bookkeeping -------------------------------------------------------


def _m_values(alg, word):
    """m_k = |theta_0| + ... + |theta_k| - k, with m_{-1} = 1, mod 2."""
    deg = alg.degree
    out = [1]
    total = 0
    for k, i in enumerate(word):
        total += int(deg[i])
        out.append((total - k) % 2)
    return out  # out[k+1] = m_k mod 2


def _n_values(alg, word):
    """n_k = |theta_1| + ... + |theta_k| - k mod 2, n_0 = 0 (bar word)."""
    deg = alg.degree
    out = [0]
    total = 0
    for k, i in enumerate(word):
        total += int(deg[i])
        out.append((total - (k + 1)) % 2)
    return out  # out[k] = n_k mod 2


def _left_mul_entries(alg, coeffs, j, tol=0.0):
    """Expansion of (sum_a coeffs_a e_a) * e_j as [(k, coeff)]."""
    vec = np.einsum("a,ak->k", coeffs, alg.mul[:, j, :])
    nz = np.nonzero(np.abs(vec) > tol)[0]
    return [(int(k), complex(vec[k])) for k in nz]


def _right_mul_entries(alg, j, coeffs, tol=0.0):
    vec = np.einsum("a,ak->k", coeffs, alg.mul[j, :, :])
    nz = np.nonzero(np.abs(vec) > tol)[0]
    return [(int(k), complex(vec[k])) for k in nz]


# -- cyclic differentials ----------------------------------------------------


def d_cyclic(c: Chain) -> Chain:
    """Differential induced by d, on cyclic words."""
    if c.kind != CYCLIC:
        raise ChainError("d_cyclic expects a cyclic chain")
    alg = c.alg
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        m = _m_values(alg, word)
        for k, idx in enumerate(word):
            entries = alg.diff_table.get(idx)
            if not entries:
                continue
            sign = -((-1.0) ** m[k])  # m[k] = m_{k-1}
            for l, cf in entries:
                out.add_term(word[:k] + (l,) + word[k + 1 :], coeff * sign * cf)
    return out


def b_cyclic(c: Chain) -> Chain:
    """Hochschild-type differential on cyclic words."""
    if c.kind != CYCLIC:
        raise ChainError("b_cyclic expects a cyclic chain")
    alg = c.alg
    deg = alg.degree
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        N = len(word) - 1
        if N == 0:
            continue
        m = _m_values(alg, word)
        for k in range(N):
            entries = alg.mul_table.get((word[k], word[k + 1]))
            if not entries:
                continue
            sign = -((-1.0) ** m[k + 1])  # m[k+1] = m_k
            for l, cf in entries:
                out.add_term(word[:k] + (l,) + word[k + 2 :], coeff * sign * cf)
        entries = alg.mul_table.get((word[N], word[0]))
        if entries:
            sign = (-1.0) ** (((int(deg[word[N]]) - 1) * m[N]) % 2)  # m[N] = m_{N-1}
            for l, cf in entries:
                out.add_term((l,) + word[1:N], coeff * sign * cf)
    return out


def B_connes(c: Chain) -> Chain:
    """Connes operator: insert the unit in slot 0 and cyclically rotate."""
    if c.kind != CYCLIC:
        raise ChainError("B_connes expects a cyclic chain")
    alg = c.alg
    u = alg.unit_index
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        N = len(word) - 1
        m = _m_values(alg, word)
        mN = m[N + 1]
        for k in range(N + 1):
            mkm1 = m[k]
            sign = (-1.0) ** (((mkm1 + 1) * (mN - mkm1)) % 2)
            out.add_term((u,) + word[k:] + word[:k], coeff * sign)
    return out


def d_total(c: Chain) -> Chain:
    """d + b - B, the total Z2 differential on the cyclic side."""
    return d_cyclic(c) + b_cyclic(c) - B_connes(c)


# -- bar differentials ---------------------------------------------------------


def d_bar(c: Chain) -> Chain:
    if c.kind not in (BAR, BAR_RED):
        raise ChainError("d_bar expects a bar chain")
    alg = c.alg
    out = Chain(alg, c.kind)
    for word, coeff in c.terms.items():
        n = _n_values(alg, word)
        for k, idx in enumerate(word):
            entries = alg.diff_table.get(idx)
            if not entries:
                continue
            sign = -((-1.0) ** n[k])  # n[k] = n_{k-1} for slot k+1
            for l, cf in entries:
                out.add_term(word[:k] + (l,) + word[k + 1 :], coeff * sign * cf)
    return out


def b_prime(c: Chain) -> Chain:
    if c.kind not in (BAR, BAR_RED):
        raise ChainError("b_prime expects a bar chain")
    alg = c.alg
    out = Chain(alg, c.kind)
    for word, coeff in c.terms.items():
        N = len(word)
        n = _n_values(alg, word)
        for k in range(N - 1):
            entries = alg.mul_table.get((word[k], word[k + 1]))
            if not entries:
                continue
            sign = -((-1.0) ** n[k + 1])  # n_k for the pair (k+1, k+2)
            for l, cf in entries:
                out.add_term(word[:k] + (l,) + word[k + 2 :], coeff * sign * cf)
    return out


def cyclicize_N(c: Chain) -> Chain:
    """Signed sum of rotations; image spans the rotation-invariant part."""
    if c.kind != BAR_RED:
        raise ChainError("cyclicize_N expects a reduced bar chain")
    alg = c.alg
    out = Chain(alg, BAR_RED)
    for word, coeff in c.terms.items():
        N = len(word)
        n = _n_values(alg, word)
        nN = n[N]
        for k in range(1, N + 1):
            sign = (-1.0) ** ((n[k] * (nN - n[k])) % 2)
            out.add_term(word[k:] + word[:k], coeff * sign)
    return out


def _require_sigma(alg):
    if alg.sigma_index is None:
        raise ChainError("operation requires an acyclic extension (no sigma in this algebra)")
    return alg.sigma_index


def alpha_map(c: Chain) -> Chain:
    """Parity-preserving map (theta_0, ...) -> N(sigma theta_0, theta_1, ...)."""
    if c.kind != CYCLIC:
        raise ChainError("alpha_map expects a cyclic chain")
    alg = c.alg
    sigma = _require_sigma(alg)
    pre = Chain(alg, BAR_RED)
    for word, coeff in c.terms.items():
        for l, cf in alg.mul_table.get((sigma, word[0]), []):
            pre.add_term((l,) + word[1:], coeff * cf)
    return cyclicize_N(pre)


def h_map(c: Chain) -> Chain:
    """(theta_0, ..., theta_N) -> N(theta_0, ..., theta_N) as a bar word."""
    if c.kind != CYCLIC:
        raise ChainError("h_map expects a cyclic chain")
    pre = Chain(c.alg, BAR_RED)
    for word, coeff in c.terms.items():
        pre.add_term(word, coeff)
    return cyclicize_N(pre)


def bar_S(c: Chain) -> Chain:
    """Insert sigma after each bar slot (gaps 1..N, unsigned)."""
    alg = c.alg
    sigma = _require_sigma(alg)
    if c.kind != BAR_RED:
        raise ChainError("bar_S expects a reduced bar chain")
    out = Chain(alg, BAR_RED)
    for word, coeff in c.terms.items():
        for k in range(1, len(word) + 1):
            out.add_term(word[:k] + (sigma,) + word[k:], coeff)
    return out


def bar_S_prime(c: Chain) -> Chain:
    """bar_S plus the insertion in front: all N+1 gaps."""
    alg = c.alg
    sigma = _require_sigma(alg)
    out = bar_S(c)
    for word, coeff in c.terms.items():
        out.add_term((sigma,) + word, coeff)
    return out


# -- Chen normalization operators ---------------------------------------------


def chen_S(c: Chain) -> Chain:
    """Insert sigma after each cyclic slot (gaps after slots 0..N)."""
    alg = c.alg
    sigma = _require_sigma(alg)
    if c.kind != CYCLIC:
        raise ChainError("chen_S expects a cyclic chain")
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        for k in range(len(word)):
            out.add_term(word[: k + 1] + (sigma,) + word[k + 1 :], coeff)
    return out


def chen_R(c: Chain) -> Chain:
    """(theta_0, ...) -> (sigma theta_0, ...)."""
    alg = c.alg
    sigma = _require_sigma(alg)
    if c.kind != CYCLIC:
        raise ChainError("chen_R expects a cyclic chain")
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        for l, cf in alg.mul_table.get((sigma, word[0]), []):
            out.add_term((l,) + word[1:], coeff * cf)
    return out


def _check_chen_f(alg, f: AlgebraElement):
    nz = np.nonzero(np.abs(f.coeffs) > 0)[0]
    if any(alg.degree[i] != 0 for i in nz):
        raise ChainError("f must have degree 0")
    if alg.base_dim is not None and any(i >= alg.base_dim for i in nz):
        raise ChainError("f must come from the base algebra (no sigma component)")


def chen_Si(f: AlgebraElement, i: int, c: Chain) -> Chain:
    """Signed insertion of a degree-0 base element after slot i."""
    alg = c.alg
    if c.kind != CYCLIC:
        raise ChainError("chen_Si expects a cyclic chain")
    _check_chen_f(alg, f)
    nz = [(int(a), complex(f.coeffs[a])) for a in np.nonzero(np.abs(f.coeffs) > 0)[0]]
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        N = len(word) - 1
        if i > N:
            continue
        m = _m_values(alg, word)
        sign = (-1.0) ** m[i + 1]  # m_i
        for a, fa in nz:
            out.add_term(word[: i + 1] + (a,) + word[i + 1 :], coeff * sign * fa)
    return out


def chen_Ti(f: AlgebraElement, i: int, c: Chain) -> Chain:
    """Move a degree-0 base element across the tensor sign at gap i."""
    alg = c.alg
    if c.kind != CYCLIC:
        raise ChainError("chen_Ti expects a cyclic chain")
    _check_chen_f(alg, f)
    df = alg.diff_coeffs(f.coeffs)
    df_nz = [(int(a), complex(df[a])) for a in np.nonzero(np.abs(df) > 0)[0]]
    out = Chain(alg, CYCLIC)
    for word, coeff in c.terms.items():
        N = len(word) - 1
        if i > N:
            continue
        if i <= N - 1:
            for l, cf in _left_mul_entries(alg, f.coeffs, word[i + 1]):
                out.add_term(word[: i + 1] + (l,) + word[i + 2 :], coeff * cf)
            for l, cf in _right_mul_entries(alg, word[i], f.coeffs):
                out.add_term(word[:i] + (l,) + word[i + 1 :], -coeff * cf)
            for a, fa in df_nz:
                out.add_term(word[: i + 1] + (a,) + word[i + 1 :], -coeff * fa)
        else:  # i == N: wrap through slot 0
            for l, cf in _left_mul_entries(alg, f.coeffs, word[0]):
                out.add_term((l,) + word[1:], coeff * cf)
            for l, cf in _right_mul_entries(alg, word[N], f.coeffs):
                out.add_term(word[:N] + (l,), -coeff * cf)
            for a, fa in df_nz:
                out.add_term(word + (a,), -coeff * fa)
    return out


# -- Chen subspace at a finite truncation ---------------------------------------


@dataclass
class Subspace:
    """Orthonormal span of chains in word coordinates."""

    alg: DgAlgebra
    kind: str
    word_index: dict
    basis: np.ndarray  # (n_words, rank), orthonormal columns
    leakage: int = 0
    meta: dict = None

    @property
    def rank(self):
        return self.basis.shape[1]

    def vectorize(self, c: Chain):
        missing = [w for w in c.terms if w not in self.word_index]
        if missing:
            raise ChainError(f"chain leaves the truncation window; offending words: {missing[:5]}")
        v = np.zeros(len(self.word_index), dtype=complex)
        for w, cf in c.terms.items():
            v[self.word_index[w]] = cf
        return v

    def residual(self, c: Chain) -> float:
        v = self.vectorize(c)
        if self.rank == 0:
            return float(np.linalg.norm(v))
        r = v - self.basis @ (self.basis.conj().T @ v)
        return float(np.linalg.norm(r))


def subspace_from_chains(chains, alg=None, kind=CYCLIC, leakage=0, meta=None, rank_tol=1e-10) -> Subspace:
    """Orthonormalize a finite family of chains (dropping zero ones)."""
    chains = [c for c in chains if c.terms]
    if not chains:
        return Subspace(alg, kind, {}, np.zeros((0, 0)), leakage, meta or {})
    alg = chains[0].alg
    kind = chains[0].kind
    word_index = {}
    for c in chains:
        for w in c.terms:
            word_index.setdefault(w, len(word_index))
    mat = np.zeros((len(word_index), len(chains)), dtype=complex)
    for j, c in enumerate(chains):
        for w, cf in c.terms.items():
            mat[word_index[w], j] = cf
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > rank_tol * (s[0] if len(s) else 1.0)))
    return Subspace(alg, kind, word_index, u[:, :rank], leakage, meta or {})


def _all_basis_words(alg, N_max, deg_window=None):
    """All reduced cyclic basis words with at most N_max slots beyond 0."""
    u = alg.unit_index
    reduced = [i for i in range(alg.dim) if i != u]
    words = []
    layer = [(i,) for i in range(alg.dim)]
    words.extend(layer)
    for _ in range(N_max):
        layer = [w + (i,) for w in layer for i in reduced]
        words.extend(layer)
    if deg_window is not None:
        lo, hi = deg_window
        deg = alg.degree

        def total(w):
            return sum(int(deg[i]) for i in w) - (len(w) - 1)

        words = [w for w in words if lo <= total(w) <= hi]
    return words


def chen_generator_images(alg, word_chain, N_max):
    """Images of one chain under S+1, R, S_i^(f), T_i^(f), f in the base
    degree-0 basis, i = 0..N_max."""
    base_dim = alg.base_dim if alg.base_dim is not None else alg.dim
    f_indices = [i for i in range(base_dim) if alg.degree[i] == 0]
    images = [chen_S(word_chain) + word_chain, chen_R(word_chain)]
    for fi in f_indices:
        f = alg.basis_element(fi)
        for i in range(N_max + 1):
            images.append(chen_Si(f, i, word_chain))
            images.append(chen_Ti(f, i, word_chain))
    return images


def chen_subspace(alg, N_max, deg_window=None, close_each=False, max_index=250_000):
    """Span of the Chen generator images and their D_tot images, windowed.

    Output words with more than N_max slots are dropped; the number of
    dropped terms is recorded as leakage.  With close_each the span is
    also closed under d, b, B separately (one pass).
    """
    sigma = _require_sigma(alg)
    del sigma
    words = _all_basis_words(alg, N_max, deg_window)
    chains = []
    leakage = 0

    def window(c):
        nonlocal leakage
        out = Chain(alg, c.kind)
        for w, cf in c.terms.items():
            if len(w) - 1 <= N_max:
                out.add_term(w, cf)
            else:
                leakage += 1
        return out

    for w in words:
        base = Chain.basis_word(alg, CYCLIC, w)
        for img in chen_generator_images(alg, base, N_max):
            img_w = window(img)
            if not img_w.terms:
                continue
            chains.append(img_w)
            chains.append(window(d_total(img_w)))
            if close_each:
                chains.append(window(d_cyclic(img_w)))
                chains.append(window(b_cyclic(img_w)))
                chains.append(window(B_connes(img_w)))
    n_index = len({w for c in chains for w in c.terms})
    if n_index > max_index:
        raise ChainError(f"truncation window too large ({n_index} words indexed)")
    sub = subspace_from_chains(chains, alg=alg, kind=CYCLIC, leakage=leakage,
                               meta={"N_max": N_max, "deg_window": deg_window, "close_each": close_each})
    if sub.rank == 0:
        sub.meta["warning"] = "empty subspace: truncation too small to contain any image"
    return sub


def chen_residual(c: Chain, sub: Subspace) -> float:
    """Distance from the chain to the subspace in word coordinates."""
    return sub.residual(c)


# -- entire seminorm bound -----------------------------------------------------


@dataclass
class SeminormBound:
    value: float
    seminorm_id: str


def _floor_half_factorial(N):
    out, k = 1.0, N // 2
    for j in range(2, k + 1):
        out *= j
    return out


def entire_bound(c: Chain, nu=None, seminorm_id="max-coeff") -> SeminormBound:
    """Upper bound sum_N pi_hat(c_N) / floor(N/2)! computed term by term.

    nu maps a basis index to its seminorm value (default 1 for every
    basis element, the designated max-coefficient norm).
    """
    total = 0.0
    off = 1 if c.kind == CYCLIC else 0
    for word, coeff in c.terms.items():
        N = len(word) - off
        prod = abs(coeff)
        if nu is not None:
            for i in word:
                prod *= nu(i)
        total += prod / _floor_half_factorial(N)
    return SeminormBound(float(total), seminorm_id)


# -- test helpers ----------------------------------------------------------------


def random_basis_word(alg, kind, N, rng):
    """A uniformly random admissible basis word (reduced where required)."""
    u = alg.unit_index
    reduced = [i for i in range(alg.dim) if i != u]
    if kind == CYCLIC:
        word = [int(rng.integers(0, alg.dim))]
        word += [int(reduced[rng.integers(0, len(reduced))]) for _ in range(N)]
    elif kind == BAR_RED:
        word = [int(reduced[rng.integers(0, len(reduced))]) for _ in range(N)]
    else:
        word = [int(rng.integers(0, alg.dim)) for _ in range(N)]
    return tuple(word)
