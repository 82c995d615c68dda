"""Exact exterior algebra over a small real vector space with complex coefficients.

Everything here is plain dense linear algebra: a degree-k form on an
n-dimensional space (n <= 7) is a complex coefficient vector indexed by the
strictly increasing k-tuples of coframe indices.  The wedge uses the
unnormalized "determinant" evaluation convention

    (a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X),

so basis products carry pure permutation signs and no factorials.  All
constants downstream (normalizations, duality factors) are derived under this
convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "Form",
    "Metric",
    "basis_form",
    "contract",
    "form_from_one_coeffs",
    "forms_close",
    "gram_matrix",
    "hodge_star",
    "index_tuples",
    "inner_product",
    "merge_sign",
    "wedge",
    "wedge_all",
    "zero_form",
]


@lru_cache(maxsize=None)
def index_tuples(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing k-tuples from 1..n, lexicographic."""
    return tuple(combinations(range(1, n + 1), k))


@lru_cache(maxsize=None)
def _tuple_position(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {t: i for i, t in enumerate(index_tuples(n, k))}


def merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of sorting the concatenation of two increasing tuples; 0 on overlap."""
    if set(a) & set(b):
        return 0, ()
    merged = a + b
    swaps = 0
    lst = list(merged)
    # insertion sort, counting inversions; tuples are tiny (k <= 7)
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            swaps += 1
            j -= 1
    return (-1) ** swaps, tuple(lst)


@lru_cache(maxsize=None)
def _wedge_table(n: int, ka: int, kb: int):
    """Sparse quadruples (ia, ib, iout, sign) for the degree (ka, kb) wedge."""
    ta, tb = index_tuples(n, ka), index_tuples(n, kb)
    pos_out = _tuple_position(n, ka + kb)
    ia_l, ib_l, io_l, s_l = [], [], [], []
    for ia, A in enumerate(ta):
        for ib, B in enumerate(tb):
            s, merged = merge_sign(A, B)
            if s != 0:
                ia_l.append(ia)
                ib_l.append(ib)
                io_l.append(pos_out[merged])
                s_l.append(s)
    return (
        np.array(ia_l, dtype=np.intp),
        np.array(ib_l, dtype=np.intp),
        np.array(io_l, dtype=np.intp),
        np.array(s_l, dtype=np.float64),
    )


@dataclass(frozen=True)
class Form:
    """A complex exterior form of fixed degree over an n-dimensional coframe."""

    dimension: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        n, k = self.dimension, self.degree
        if not (0 <= k <= n <= 7):
            raise ValueError(f"degree {k} out of range for dimension {n}")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (comb(n, k),):
            raise ValueError(
                f"expected {comb(n, k)} coefficients for degree {k} in dimension {n}, "
                f"got shape {c.shape}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # -- algebra -------------------------------------------------------------

    def _check_compatible(self, other: "Form"):
        if self.dimension != other.dimension:
            raise ValueError("dimension mismatch")
        if self.degree != other.degree:
            raise ValueError("degree mismatch in addition")

    def __add__(self, other: "Form") -> "Form":
        self._check_compatible(other)
        return Form(self.dimension, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "Form") -> "Form":
        self._check_compatible(other)
        return Form(self.dimension, self.degree, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "Form":
        return Form(self.dimension, self.degree, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Form":
        return Form(self.dimension, self.degree, -self.coeffs)

    def conjugate(self) -> "Form":
        return Form(self.dimension, self.degree, np.conj(self.coeffs))

    def real(self) -> "Form":
        return Form(self.dimension, self.degree, self.coeffs.real.astype(np.complex128))

    def imag(self) -> "Form":
        return Form(self.dimension, self.degree, self.coeffs.imag.astype(np.complex128))

    def norm(self) -> float:
        """Max-abs coefficient norm; the comparison norm used everywhere."""
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, self.norm())
        return float(np.max(np.abs(self.coeffs.imag))) <= tol * scale

    def coefficient(self, indices: tuple[int, ...]) -> complex:
        """Coefficient of an arbitrary index tuple, with antisymmetry signs."""
        if len(set(indices)) != len(indices):
            return 0.0
        order = tuple(sorted(indices))
        perm_sign = _permutation_sign(indices)
        return perm_sign * self.coeffs[_tuple_position(self.dimension, self.degree)[order]]

    def evaluate(self, vectors) -> complex:
        """Evaluate on degree-many frame-coordinate vectors (determinant convention)."""
        k = self.degree
        if len(vectors) != k:
            raise ValueError(f"need {k} vectors, got {len(vectors)}")
        if k == 0:
            return complex(self.coeffs[0])
        V = np.column_stack([np.asarray(v, dtype=np.complex128) for v in vectors])
        total = 0.0 + 0.0j
        for pos, idx in enumerate(index_tuples(self.dimension, k)):
            c = self.coeffs[pos]
            if c != 0:
                rows = [i - 1 for i in idx]
                total += c * np.linalg.det(V[rows, :])
        return complex(total)


def _permutation_sign(indices) -> int:
    lst = list(indices)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    return sign


def zero_form(n: int, k: int) -> Form:
    return Form(n, k, np.zeros(comb(n, k), dtype=np.complex128))


def basis_form(n: int, indices: tuple[int, ...]) -> Form:
    """The basis monomial e^{i1...ik} (indices strictly increasing, 1-based)."""
    k = len(indices)
    c = np.zeros(comb(n, k), dtype=np.complex128)
    c[_tuple_position(n, k)[tuple(indices)]] = 1.0
    return Form(n, k, c)


def form_from_one_coeffs(n: int, vector) -> Form:
    """A 1-form from its coefficient vector (alpha = sum_i v_i e^i)."""
    return Form(n, 1, np.asarray(vector, dtype=np.complex128))


def wedge(a: Form, b: Form) -> Form:
    """Exterior product under the determinant evaluation convention."""
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    n = a.dimension
    k = a.degree + b.degree
    if k > n:
        raise ValueError(f"degree overflow: {a.degree}+{b.degree} > {n}")
    ia, ib, io, s = _wedge_table(n, a.degree, b.degree)
    out = np.zeros(comb(n, k), dtype=np.complex128)
    if len(io):
        np.add.at(out, io, s * a.coeffs[ia] * b.coeffs[ib])
    return Form(n, k, out)


def wedge_all(forms) -> Form:
    it = iter(forms)
    acc = next(it)
    for f in it:
        acc = wedge(acc, f)
    return acc


def contract(v, a: Form) -> Form:
    """Interior product: (iota_v a)(X2,...,Xk) = a(v, X2,...,Xk)."""
    if a.degree == 0:
        raise ValueError("cannot contract a degree-0 form")
    n, k = a.dimension, a.degree
    vv = np.asarray(v, dtype=np.complex128)
    pos_out = _tuple_position(n, k - 1)
    out = np.zeros(comb(n, k - 1), dtype=np.complex128)
    for pos, idx in enumerate(index_tuples(n, k)):
        c = a.coeffs[pos]
        if c == 0:
            continue
        for slot, i in enumerate(idx):
            rest = idx[:slot] + idx[slot + 1:]
            out[pos_out[rest]] += ((-1) ** slot) * vv[i - 1] * c
    return Form(n, k - 1, out)


@dataclass(frozen=True)
class Metric:
    """Symmetric positive-definite metric in coframe indices, with orientation."""

    matrix: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        g = np.asarray(self.matrix, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("metric must be a square matrix")
        if not np.allclose(g, g.T, atol=1e-12):
            raise ValueError("metric must be symmetric")
        eigs = np.linalg.eigvalsh(g)
        if eigs.min() <= 0:
            raise ValueError(f"metric not positive definite (min eigenvalue {eigs.min():g})")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        g = g.copy()
        g.flags.writeable = False
        object.__setattr__(self, "matrix", g)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def volume_form(self) -> Form:
        n = self.dimension
        scale = self.orientation * np.sqrt(np.linalg.det(self.matrix))
        c = np.zeros(1, dtype=np.complex128)
        c[0] = scale
        return Form(n, n, c)


def gram_matrix(g: Metric, k: int) -> np.ndarray:
    """Inner products <e^I, e^J> = det(g^{-1} restricted), on degree-k monomials."""
    ginv = g.inverse()
    tups = index_tuples(g.dimension, k)
    m = len(tups)
    G = np.zeros((m, m), dtype=np.float64)
    for a, I in enumerate(tups):
        ri = [i - 1 for i in I]
        for b, J in enumerate(tups):
            rj = [j - 1 for j in J]
            G[a, b] = np.linalg.det(ginv[np.ix_(ri, rj)]) if k else 1.0
    return G


def inner_product(g: Metric, a: Form, b: Form) -> complex:
    """Bilinear (unconjugated) extension of the metric pairing on equal-degree forms."""
    if a.degree != b.degree or a.dimension != b.dimension:
        raise ValueError("inner product needs equal degree and dimension")
    G = gram_matrix(g, a.degree)
    return complex(a.coeffs @ G @ b.coeffs)


@lru_cache(maxsize=None)
def _top_pairing(n: int, k: int) -> np.ndarray:
    """P[I, K] = coefficient of e^{1..n} in e^I ^ e^K, for |I| = k, |K| = n - k."""
    ti, tk = index_tuples(n, k), index_tuples(n, n - k)
    P = np.zeros((len(ti), len(tk)), dtype=np.float64)
    for a, I in enumerate(ti):
        for b, K in enumerate(tk):
            s, merged = merge_sign(I, K)
            if s != 0:
                P[a, b] = s
    return P


def hodge_star(g: Metric, a: Form) -> Form:
    """Hodge dual: a ^ *b = <a, b>_g Vol_g for all a of the degree of b."""
    n, k = a.dimension, a.degree
    if g.dimension != n:
        raise ValueError("metric dimension mismatch")
    P = _top_pairing(n, k)
    G = gram_matrix(g, k)
    vol = g.orientation * np.sqrt(np.linalg.det(g.matrix))
    # P is a signed permutation matrix, so its inverse is its transpose.
    S = P.T @ G * vol
    return Form(n, n - k, S @ a.coeffs)


def forms_close(a: Form, b: Form, tol: float = 1e-12) -> bool:
    """Comparison at absolute tolerance after scaling to unit max-norm."""
    scale = max(1.0, a.norm(), b.norm())
    return (a - b).norm() <= tol * scale
