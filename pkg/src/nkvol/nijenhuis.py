"""Nijenhuis tensor by two routes, the intrinsic volume form, and its density.

The tensor is computed either from frame brackets,

    N(X, Y) = P^{0,1} [P^{1,0} X, P^{1,0} Y],

dualized against a chosen (1,0) coframe, or as the (2,-1) component of the
exterior derivative on (0,1)-forms.  The two agree up to the frozen route
sign in `conventions`.

The volume form is assembled by the canonical contraction of
det N* (x) conj(det N*): with M the matrix of N* in a frame theta and
Theta = theta^1 ^ theta^2 ^ theta^3,

    Vol = |det M|^2 * i Theta ^ conj(Theta),

which is frame-independent (a GL(3,C) frame change scales |det M|^2 by
1/|det S|^2 and i Theta ^ conj Theta by |det S|^2) and non-negative against
the orientation induced by the almost complex structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .multilinear import Form, wedge, zero_form
from .frame_manifold import CoframeAlgebra, d_invariant
from .acs import AlmostComplexStructure, ComplexFrame, bidegree_project
from .conventions import NIJ_D_ROUTE_SIGN

__all__ = [
    "NijenhuisTensor",
    "VolumeDensity",
    "cartan_compatibility",
    "nijenhuis_via_brackets",
    "nijenhuis_via_d",
    "volume_form",
]

NONDEGENERACY_RTOL = 1e-9


def _zh_two_forms(frame: ComplexFrame) -> list[Form]:
    """tcheck^1 = theta^23, tcheck^2 = -theta^13, tcheck^3 = theta^12."""
    t = [frame.theta(a) for a in range(3)]
    return [wedge(t[1], t[2]), -1.0 * wedge(t[0], t[2]), wedge(t[0], t[1])]


@dataclass(frozen=True)
class NijenhuisTensor:
    """N*: Lambda^{0,1} -> Lambda^{2,0} in the stored (1,0) coframe.

    matrix[b, a] is the tcheck^b-coefficient of N*(conj theta^a), where the
    tcheck basis is dual to theta under theta^a ^ tcheck^b = delta Theta.
    """

    frame: ComplexFrame
    matrix: np.ndarray
    route: str

    @property
    def nondegenerate(self) -> bool:
        m = self.matrix
        op = np.linalg.norm(m, 2)
        return bool(abs(np.linalg.det(m)) > NONDEGENERACY_RTOL * max(op, 1e-300) ** 3)

    def apply(self, zeta: Form) -> Form:
        """N* on an arbitrary (0,1)-form (expanded over conj theta)."""
        coeffs = np.array([zeta.evaluate([self.frame.v_bar(a)]) for a in range(3)])
        out = zero_form(6, 2)
        zh = _zh_two_forms(self.frame)
        img = self.matrix @ coeffs
        for b in range(3):
            out = out + img[b] * zh[b]
        return out

    def in_frame(self, frame: ComplexFrame) -> np.ndarray:
        """The matrix transported to another (1,0) coframe of the same J."""
        # theta'^a = sum_c S[a, c] theta^c
        S = np.array([[frame.theta(a).evaluate([self.frame.v(c)]) for c in range(3)]
                      for a in range(3)])
        det = np.linalg.det(S)
        return (S @ self.matrix @ np.conj(S).T) / det


def nijenhuis_via_brackets(alg: CoframeAlgebra, J: AlmostComplexStructure,
                           frame: ComplexFrame | None = None) -> NijenhuisTensor:
    """Frame-bracket route: dualize N(X,Y) = P^{0,1}[P^{1,0}X, P^{1,0}Y]."""
    fr = frame if frame is not None else J.frame()
    q01 = J.q01()
    M = np.zeros((3, 3), dtype=np.complex128)
    # N*(conj theta^a)(v_c, v_d) = conj(theta^a)(N(v_c, v_d))
    for a in range(3):
        tb = fr.theta_bar(a)
        vals = {}
        for c in range(3):
            for d in range(c + 1, 3):
                ncd = q01 @ alg.bracket(fr.v(c), fr.v(d))
                vals[(c, d)] = tb.evaluate([ncd])
        # express the (2,0)-form with values vals on (v_c, v_d) in the tcheck basis:
        # tcheck^1 = theta^23 evaluates to 1 on (v_2, v_3) etc., with signs
        M[0, a] = vals[(1, 2)]
        M[1, a] = -vals[(0, 2)]
        M[2, a] = vals[(0, 1)]
    return NijenhuisTensor(fr, M, route="brackets")


def nijenhuis_via_d(alg: CoframeAlgebra, J: AlmostComplexStructure,
                    frame: ComplexFrame | None = None) -> NijenhuisTensor:
    """(2,-1)-part-of-d route: N* = Pi^{2,0} d restricted to (0,1)-forms.

    Returned in the bracket-route normalization (the frozen route sign is
    divided out), so both constructors are interchangeable downstream.
    """
    fr = frame if frame is not None else J.frame()
    M = np.zeros((3, 3), dtype=np.complex128)
    for a in range(3):
        img = bidegree_project(J, d_invariant(alg, fr.theta_bar(a)), 2, 0)
        for b in range(3):
            # tcheck-coefficient via evaluation against the dual vector pairs
            pair = [(1, 2), (0, 2), (0, 1)][b]
            sign = [1.0, -1.0, 1.0][b]
            M[b, a] = sign * img.evaluate([fr.v(pair[0]), fr.v(pair[1])])
    return NijenhuisTensor(fr, M / NIJ_D_ROUTE_SIGN, route="d")


@dataclass(frozen=True)
class VolumeDensity:
    """The canonical volume 6-form and its density against e^{123456}."""

    vol_form: Form
    psi: float
    orientation: float  # sign of the J-orientation against e^{123456}


def volume_form(nij: NijenhuisTensor) -> VolumeDensity:
    """Vol = |det M|^2 * i Theta ^ conj Theta; Psi its density, >= 0."""
    fr = nij.frame
    theta_top = fr.theta_top()
    kappa = 1j * wedge(theta_top, theta_top.conjugate())
    density_kappa = kappa.coeffs[0]
    # kappa is a real positive multiple of the J-orientation by construction
    orient = float(np.sign(density_kappa.real))
    det2 = abs(np.linalg.det(nij.matrix)) ** 2
    vol = det2 * kappa
    psi = det2 * abs(density_kappa)
    return VolumeDensity(vol_form=vol, psi=float(psi), orientation=orient)


def cartan_compatibility(alg: CoframeAlgebra, J: AlmostComplexStructure,
                         omega: Form) -> float:
    """Residual of d^{2,-1} = wedge after Id (x) N* on a (1,1)-form.

    The left side is the (3,0) component of d omega; the right side applies
    the bracket-route N* to the (0,1) leg of omega and wedges the legs back
    together.  The contract is residual <= 1e-10 for every valid input.
    """
    from .acs import is_pure_bidegree

    if not is_pure_bidegree(J, omega, 1, 1):
        raise ValueError("cartan_compatibility expects a (1,1)-form")
    lhs = bidegree_project(J, d_invariant(alg, omega), 3, 0)
    nij = nijenhuis_via_brackets(alg, J)
    fr = nij.frame
    rhs = zero_form(6, 3)
    for a in range(3):
        for b in range(3):
            # coefficient of theta^a (x) conj theta^b in omega
            coef = omega.evaluate([fr.v(a), fr.v_bar(b)])
            if coef != 0:
                rhs = rhs + coef * wedge(fr.theta(a), nij.apply(fr.theta_bar(b)))
    scale = max(1.0, lhs.norm(), rhs.norm())
    return float((lhs - rhs).norm() / scale)
