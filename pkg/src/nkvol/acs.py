"""Almost complex structures on 6-dimensional coframes and bidegree calculus.

Conventions (fixed once, used everywhere):

* The stored matrix acts on the coframe: row i holds the coefficients of
  J e^i in the basis e^j.  Read column-wise the same matrix is the tangent
  action J e_j = sum_i A[i, j] e_i, and on 1-form coefficient vectors the
  pullback J* acts as A^T.
* Lambda^{1,0} is the +i eigenspace of J* (projector P^{1,0} = (Id - i J*)/2).
  The sign choice propagates into the sign of the structure constant of the
  solved SU(3) data; it is never re-derived elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
import scipy.linalg

from .multilinear import Form, basis_form, form_from_one_coeffs, index_tuples, wedge, zero_form
from .frame_manifold import CoframeAlgebra, d_invariant

__all__ = [
    "AlmostComplexStructure",
    "ComplexFrame",
    "bidegree_project",
    "bidegrees",
    "d_split",
    "j_multiplicative",
    "project_to_acs",
]

ACS_TOL = 1e-12


@dataclass(frozen=True)
class AlmostComplexStructure:
    """A real endomorphism with J^2 = -Id acting on a 6-dimensional coframe."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("J must be a square matrix")
        n = m.shape[0]
        scale = max(1.0, np.linalg.norm(m, 2) ** 2)
        if np.max(np.abs(m @ m + np.eye(n))) > 1e-10 * scale:
            raise ValueError("J^2 != -Id")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def jstar(self) -> np.ndarray:
        """J* on 1-form coefficient vectors."""
        return self.matrix.T

    def p10(self) -> np.ndarray:
        return 0.5 * (np.eye(self.dimension) - 1j * self.jstar)

    def p01(self) -> np.ndarray:
        return 0.5 * (np.eye(self.dimension) + 1j * self.jstar)

    def q10(self) -> np.ndarray:
        """Projector onto (1,0) tangent vectors (the +i eigenspace of J)."""
        return 0.5 * (np.eye(self.dimension) - 1j * self.matrix)

    def q01(self) -> np.ndarray:
        return 0.5 * (np.eye(self.dimension) + 1j * self.matrix)

    def apply_tangent(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=np.complex128)

    # -- derived structure, cached per instance -------------------------------

    def _cache(self) -> dict:
        try:
            return object.__getattribute__(self, "_cache_dict")
        except AttributeError:
            object.__setattr__(self, "_cache_dict", {})
            return object.__getattribute__(self, "_cache_dict")

    def derivation_matrix(self, k: int) -> np.ndarray:
        """Extension of J* to degree-k forms as a derivation (charge operator)."""
        cache = self._cache()
        key = ("deriv", k)
        if key not in cache:
            cache[key] = _derivation_matrix(self, k)
        return cache[key]

    def bidegree_projector(self, p: int, q: int) -> np.ndarray:
        """Matrix of Pi^{p,q} on degree-(p+q) coefficient vectors."""
        k = p + q
        cache = self._cache()
        key = ("proj", p, q)
        if key not in cache:
            D = self.derivation_matrix(k)
            eye = np.eye(D.shape[0], dtype=np.complex128)
            proj = eye
            target = 1j * (p - q)
            for pp, qq in bidegrees(self.dimension, k):
                if (pp, qq) == (p, q):
                    continue
                ev = 1j * (pp - qq)
                proj = proj @ (D - ev * eye) / (target - ev)
            cache[key] = proj
        return cache[key]

    def frame(self) -> "ComplexFrame":
        """Deterministic (1,0) coframe/frame pair (QR-pivoted choice)."""
        cache = self._cache()
        if "frame" not in cache:
            cache["frame"] = _default_frame(self)
        return cache["frame"]


def bidegrees(n: int, k: int) -> list[tuple[int, int]]:
    """Admissible (p, q) with p + q = k on complex dimension n/2."""
    h = n // 2
    return [(p, k - p) for p in range(max(0, k - h), min(h, k) + 1)]


def _derivation_matrix(J: AlmostComplexStructure, k: int) -> np.ndarray:
    n = J.dimension
    tups = index_tuples(n, k)
    m = len(tups)
    D = np.zeros((m, m), dtype=np.complex128)
    if k == 0:
        return D
    js = J.jstar
    for col, idx in enumerate(tups):
        f = zero_form(n, k)
        for slot, i in enumerate(idx):
            jei = form_from_one_coeffs(n, js @ _unit(n, i - 1))
            factors = [basis_form(n, (j,)) for j in idx]
            factors[slot] = jei
            term = factors[0]
            for fac in factors[1:]:
                term = wedge(term, fac)
            f = f + term
        D[:, col] = f.coeffs
    return D


def _unit(n: int, i: int) -> np.ndarray:
    v = np.zeros(n)
    v[i] = 1.0
    return v


@dataclass(frozen=True)
class ComplexFrame:
    """A basis theta^1..theta^3 of (1,0)-forms with dual (1,0) frame vectors.

    theta[a](v[b]) = delta_ab, conjugates give the (0,1) side.  Any complex
    frame works for the invariant computations; adapted (orthonormal) frames
    are built in the SU(3) module.
    """

    J: AlmostComplexStructure
    theta_coeffs: np.ndarray   # (3, n) rows: coefficients of theta^a
    v_coords: np.ndarray       # (n, 3) columns: the dual (1,0) vectors

    @property
    def dimension(self) -> int:
        return self.theta_coeffs.shape[1]

    def theta(self, a: int) -> Form:
        return form_from_one_coeffs(self.dimension, self.theta_coeffs[a])

    def theta_bar(self, a: int) -> Form:
        return form_from_one_coeffs(self.dimension, np.conj(self.theta_coeffs[a]))

    def v(self, a: int) -> np.ndarray:
        return self.v_coords[:, a]

    def v_bar(self, a: int) -> np.ndarray:
        return np.conj(self.v_coords[:, a])

    def theta_top(self) -> Form:
        """theta^1 ^ theta^2 ^ theta^3."""
        return wedge(wedge(self.theta(0), self.theta(1)), self.theta(2))

    def check_residual(self) -> float:
        """Max deviation of duality/type relations; diagnostics for tests."""
        res = 0.0
        pair = self.theta_coeffs @ self.v_coords
        res = max(res, float(np.max(np.abs(pair - np.eye(3)))))
        jt = self.J.jstar
        for a in range(3):
            res = max(res, float(np.max(np.abs(jt @ self.theta_coeffs[a] - 1j * self.theta_coeffs[a]))))
        return res


def frame_from_thetas(J: AlmostComplexStructure, rows: np.ndarray) -> ComplexFrame:
    """Build the dual (1,0) vectors for three independent (1,0)-form rows."""
    n = J.dimension
    rows = np.asarray(rows, dtype=np.complex128)
    B = scipy.linalg.orth(J.q10())  # (n, 3) basis of T^{1,0}
    v = B @ np.linalg.inv(rows @ B)
    return ComplexFrame(J, rows, v)


def _default_frame(J: AlmostComplexStructure) -> ComplexFrame:
    rows = scipy.linalg.orth(J.p10()).T  # orthonormal basis of Lambda^{1,0}
    return frame_from_thetas(J, rows)


def project_to_acs(K: np.ndarray) -> np.ndarray:
    """Nearest-in-spirit renormalization of K to an exact J^2 = -Id structure.

    Splits C^n by the eigenvalue sign of Im(eig(K)) and rebuilds the structure
    that is +i on the positive part.  Exact up to floating arithmetic.
    """
    K = np.asarray(K, dtype=np.float64)
    n = K.shape[0]
    w, V = np.linalg.eig(K)
    pos = np.where(w.imag > 0)[0]
    if len(pos) != n // 2:
        raise ValueError("matrix too far from an almost complex structure")
    Vp = V[:, pos]
    Vm = np.conj(Vp)
    basis = np.hstack([Vp, Vm])
    D = np.diag([1j] * (n // 2) + [-1j] * (n // 2))
    Jnew = basis @ D @ np.linalg.inv(basis)
    Jnew = Jnew.real
    # symmetrize the tiny imaginary leakage away and enforce the invariant
    err = np.max(np.abs(Jnew @ Jnew + np.eye(n)))
    if err > 1e-9:
        raise ValueError(f"projection failed: |J^2 + Id| = {err:g}")
    return Jnew


def bidegree_project(J: AlmostComplexStructure, a: Form, p: int, q: int) -> Form:
    """Component of a degree-(p+q) form under the Hodge-type decomposition."""
    if p + q != a.degree:
        raise ValueError(f"(p, q) = ({p}, {q}) does not sum to degree {a.degree}")
    if (p, q) not in bidegrees(a.dimension, a.degree):
        return zero_form(a.dimension, a.degree)
    proj = J.bidegree_projector(p, q)
    return Form(a.dimension, a.degree, proj @ a.coeffs)


def is_pure_bidegree(J: AlmostComplexStructure, a: Form, p: int, q: int,
                     tol: float = 1e-10) -> bool:
    return (bidegree_project(J, a, p, q) - a).norm() <= tol * max(1.0, a.norm())


def d_split(alg: CoframeAlgebra, J: AlmostComplexStructure, a: Form,
            p: int | None = None, q: int | None = None) -> tuple[Form, Form, Form, Form]:
    """The four bidegree components of d on a pure (p, q) form.

    Returns (d^{2,-1} a, d^{1,0} a, d^{0,1} a, d^{-1,2} a), located at
    (p+2, q-1), (p+1, q), (p, q+1), (p-1, q+2).  Components whose target
    leaves the admissible range are identically zero.  When (p, q) is not
    supplied it is detected from the input; mixed-bidegree input is rejected
    either way, callers project first.
    """
    if p is None or q is None:
        for pp, qq in bidegrees(a.dimension, a.degree):
            if is_pure_bidegree(J, a, pp, qq):
                p, q = pp, qq
                break
        else:
            raise ValueError("input has mixed bidegree; project before splitting")
    if not is_pure_bidegree(J, a, p, q):
        raise ValueError(f"input is not of pure bidegree ({p}, {q})")
    da = d_invariant(alg, a)
    targets = [(p + 2, q - 1), (p + 1, q), (p, q + 1), (p - 1, q + 2)]
    out = []
    for tp, tq in targets:
        if (tp, tq) in bidegrees(a.dimension, a.degree + 1):
            out.append(bidegree_project(J, da, tp, tq))
        else:
            out.append(zero_form(a.dimension, a.degree + 1))
    return tuple(out)


def j_multiplicative(J: AlmostComplexStructure, a: Form) -> Form:
    """Precompose every slot with J: on a (p, q) form this is i^{p-q} times it."""
    n, k = a.dimension, a.degree
    if k == 0:
        return a
    W = _multiplicative_matrix(J, k)
    return Form(n, k, W @ a.coeffs)


def _multiplicative_matrix(J: AlmostComplexStructure, k: int) -> np.ndarray:
    cache = J._cache()
    key = ("mult", k)
    if key not in cache:
        n = J.dimension
        tups = index_tuples(n, k)
        js = J.jstar
        m = len(tups)
        W = np.zeros((m, m), dtype=np.complex128)
        for col, idx in enumerate(tups):
            fac = [form_from_one_coeffs(n, js @ _unit(n, i - 1)) for i in idx]
            term = fac[0]
            for f in fac[1:]:
                term = wedge(term, f)
            W[:, col] = term.coeffs
        cache[key] = W
    return cache[key]
