"""The Riemannian cone as a graded 7-dimensional model and its G2 geometry.

Cone forms are finite sums of t^w alpha and t^w dt ^ beta with alpha, beta
invariant forms on the 6-dimensional base and integer weights w.  The cone
differential and the Hodge star of the cone metric t^2 g + dt^2 act termwise:

    d(t^w alpha)        = t^w d alpha + w t^{w-1} dt ^ alpha
    d(t^w dt ^ beta)    = -t^w dt ^ d beta
    *(t^w alpha_k)      = t^{w+6-2k} (*6 alpha) ^ dt
    *(t^w dt ^ beta_k)  = t^{w+6-2k} (*6 beta)

Stability of a 3-form phi on a 7-dimensional space is decided through the
bilinear form B(x, y) e^{1..7} = (iota_x phi) ^ (iota_y phi) ^ phi: definite B
means the stabilizer is the 14-dimensional compact group and the form induces
the metric B / (det B)^{1/9} after orientation normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .multilinear import Form, Metric, basis_form, contract, hodge_star, index_tuples, wedge, zero_form
from .frame_manifold import CoframeAlgebra, d_invariant
from .acs import AlmostComplexStructure, j_multiplicative
from .hermitian_torsion import hermitian_metric
from .nk_su3 import SU3Structure

__all__ = [
    "ConeForm",
    "FernandezGrayReport",
    "MetricRoundtripReport",
    "Stable3FormReport",
    "build_cone_3form",
    "cone_metric_at_one",
    "d_cone",
    "fernandez_gray_check",
    "flat_g2_form",
    "flat_su3_forms",
    "hodge_cone",
    "metric_roundtrip",
    "normalize_to_unit_lambda",
    "stability_check",
]


@dataclass(frozen=True)
class ConeForm:
    """Finite sum of t^w alpha and t^w dt ^ beta over a 6-dimensional base."""

    degree: int
    terms: tuple  # tuple of (weight, has_dt, Form), unique (weight, has_dt) keys

    @staticmethod
    def from_terms(degree: int, entries) -> "ConeForm":
        acc: dict = {}
        for w, has_dt, f in entries:
            base_deg = degree - (1 if has_dt else 0)
            if f.degree != base_deg:
                raise ValueError(
                    f"term (w={w}, dt={has_dt}) has base degree {f.degree}, expected {base_deg}"
                )
            key = (int(w), bool(has_dt))
            acc[key] = acc[key] + f if key in acc else f
        cleaned = tuple(
            (w, dt, f) for (w, dt), f in sorted(acc.items()) if f.norm() > 0.0
        )
        return ConeForm(degree, cleaned)

    def __add__(self, other: "ConeForm") -> "ConeForm":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return ConeForm.from_terms(self.degree, list(self.terms) + list(other.terms))

    def __mul__(self, scalar) -> "ConeForm":
        return ConeForm.from_terms(
            self.degree, [(w, dt, complex(scalar) * f) for w, dt, f in self.terms]
        )

    __rmul__ = __mul__

    def __sub__(self, other: "ConeForm") -> "ConeForm":
        return self + (-1.0) * other

    def norm(self) -> float:
        return max((f.norm() for _, _, f in self.terms), default=0.0)

    def weights(self) -> set:
        return {w for w, _, _ in self.terms}

    def at_t(self, t: float) -> Form:
        """Evaluate on the 7-dimensional tangent space at parameter t (e^7 = dt)."""
        out = zero_form(7, self.degree)
        for w, has_dt, f in self.terms:
            g7 = _embed(f)
            if has_dt:
                g7 = wedge(basis_form(7, (7,)), g7)
            out = out + (t ** w) * g7
        return out


def _embed(f: Form) -> Form:
    """A base form as a 7-dimensional form over the indices 1..6."""
    out = np.zeros(comb(7, f.degree), dtype=np.complex128)
    pos7 = {tup: i for i, tup in enumerate(index_tuples(7, f.degree))}
    for p, tup in enumerate(index_tuples(6, f.degree)):
        out[pos7[tup]] = f.coeffs[p]
    return Form(7, f.degree, out)


def d_cone(alg: CoframeAlgebra, cf: ConeForm) -> ConeForm:
    entries = []
    for w, has_dt, f in cf.terms:
        if has_dt:
            if f.degree < 6:
                entries.append((w, True, -1.0 * d_invariant(alg, f)))
        else:
            if f.degree < 6:
                entries.append((w, False, d_invariant(alg, f)))
            if w != 0:
                entries.append((w - 1, True, float(w) * f))
    return ConeForm.from_terms(cf.degree + 1, entries)


def hodge_cone(g6: Metric, cf: ConeForm) -> ConeForm:
    entries = []
    for w, has_dt, f in cf.terms:
        k = f.degree
        star = hodge_star(g6, f)
        if has_dt:
            entries.append((w + 6 - 2 * k, False, star))
        else:
            # (*6 alpha) ^ dt = (-1)^{6-k} dt ^ (*6 alpha)
            entries.append((w + 6 - 2 * k, True, float((-1) ** (6 - k)) * star))
    return ConeForm.from_terms(7 - cf.degree, entries)


def normalize_to_unit_lambda(s: SU3Structure) -> tuple[SU3Structure, float]:
    """Rescale the base data so the structure constant becomes 1.

    omega -> lam^2 omega, Omega -> lam^3 Omega leaves |Omega| = 1 and turns
    d omega = 3 lam Re Omega into d omega = 3 Re Omega; the factor is returned
    for the report.
    """
    lam = s.lam
    if lam <= 0:
        raise ValueError("normalization needs a strictly positive constant")
    snew = SU3Structure(s.J, (lam ** 2) * s.omega, (lam ** 3) * s.Omega, 1.0)
    return snew, lam


def build_cone_3form(s: SU3Structure, alg: CoframeAlgebra | None = None) -> ConeForm:
    """rho = 3 t^2 omega ^ dt + t^3 d omega in the graded cone model.

    When an algebra is supplied, d omega is computed on it; the caller is
    responsible for passing data already normalized to unit lambda when the
    displayed duality identities are to hold on the nose.
    """
    if s.omega.norm() == 0.0:
        return ConeForm.from_terms(3, [])
    if alg is None:
        raise ValueError("an algebra is required to differentiate omega")
    domega = d_invariant(alg, s.omega)
    return ConeForm.from_terms(3, [(2, True, 3.0 * s.omega), (3, False, domega)])


def base_metric_oriented(s: SU3Structure) -> Metric:
    """The Hermitian metric of (J, omega) carrying the J-orientation sign."""
    g = hermitian_metric(s.J, s.omega)
    vol = (1.0 / 6.0) * wedge(wedge(s.omega, s.omega), s.omega)
    orient = 1 if vol.coeffs[0].real > 0 else -1
    return Metric(g.matrix, orientation=orient)


# ---------------------------------------------------------------------------
# Stability and the induced metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stable3FormReport:
    bilinear: np.ndarray        # B with B(x,y) e^{1..7} = (ix phi)^(iy phi)^phi
    stable: bool
    orientation_sign: int       # sign applied to make B positive definite
    metric: np.ndarray | None   # g_phi = B'/(det B')^{1/9}, None if not stable
    stabilizer_dimension: int   # nullity of the gl(7) action on phi
    symmetry_defect: float


def stability_check(phi: Form) -> Stable3FormReport:
    if phi.dimension != 7 or phi.degree != 3:
        raise ValueError("expected a 3-form on a 7-dimensional space")
    eye = np.eye(7)
    contractions = [contract(eye[i], phi) for i in range(7)]
    B = np.zeros((7, 7))
    defect = 0.0
    for i in range(7):
        for j in range(i, 7):
            val = wedge(wedge(contractions[i], contractions[j]), phi).coeffs[0]
            defect = max(defect, abs(val.imag))
            B[i, j] = B[j, i] = val.real
    eigs = np.linalg.eigvalsh(B)
    if eigs.min() > 0:
        sign = 1
    elif eigs.max() < 0:
        sign = -1
    else:
        sign = 0
    metric = None
    if sign != 0:
        Bp = sign * B
        metric = Bp / (np.linalg.det(Bp) ** (1.0 / 9.0))
    nullity = 49 - _gl7_action_rank(phi)
    return Stable3FormReport(
        bilinear=B,
        stable=bool(sign != 0),
        orientation_sign=sign,
        metric=metric,
        stabilizer_dimension=nullity,
        symmetry_defect=defect,
    )


def _gl7_action_rank(phi: Form) -> int:
    """Rank of a in gl(7) -> (derivation action of a on phi)."""
    cols = []
    for p in range(7):
        for q in range(7):
            a = np.zeros((7, 7))
            a[p, q] = 1.0
            cols.append(_derivation_action(a, phi).coeffs)
    M = np.column_stack(cols)
    M = np.vstack([M.real, M.imag])
    return int(np.linalg.matrix_rank(M, tol=1e-8))


def _derivation_action(a: np.ndarray, phi: Form) -> Form:
    """Sum over slots of phi(..., aX, ...) as a derivation on coefficients."""
    from .multilinear import form_from_one_coeffs

    n, k = phi.dimension, phi.degree
    out = zero_form(n, k)
    aT = a.T
    for p, idx in enumerate(index_tuples(n, k)):
        c = phi.coeffs[p]
        if c == 0:
            continue
        for slot, i in enumerate(idx):
            moved = form_from_one_coeffs(n, aT[:, i - 1])
            factors = [basis_form(n, (j,)) for j in idx]
            factors[slot] = moved
            term = factors[0]
            for fac in factors[1:]:
                term = wedge(term, fac)
            out = out + c * term
    return out


def flat_su3_forms() -> tuple[Form, Form]:
    """The flat calibration pair omega0, Omega0 (dz_k = e^{2k-1} + i e^{2k})."""
    omega0 = (wedge(basis_form(6, (1,)), basis_form(6, (2,)))
              + wedge(basis_form(6, (3,)), basis_form(6, (4,)))
              + wedge(basis_form(6, (5,)), basis_form(6, (6,))))
    dz = [basis_form(6, (2 * k + 1,)) + 1j * basis_form(6, (2 * k + 2,)) for k in range(3)]
    Omega0 = wedge(wedge(dz[0], dz[1]), dz[2])
    return omega0, Omega0


def flat_g2_form() -> Form:
    """The reference stable 3-form omega0 ^ dt + Re Omega0 on 7 dimensions."""
    omega0, Omega0 = flat_su3_forms()
    return wedge(_embed(omega0), basis_form(7, (7,))) + _embed(Omega0.real())


# ---------------------------------------------------------------------------
# Fernandez-Gray and the metric roundtrip
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FernandezGrayReport:
    d_rho_residual: float
    dstar_rho_residual: float
    star_formula_residual: float   # termwise match of *rho against the display
    rotation_relation_residual: float  # lam I(d omega) = Im Omega, slotwise action
    lambda_rescale: float

    def passes(self, tol: float = 1e-9) -> bool:
        return max(self.d_rho_residual, self.dstar_rho_residual) <= tol


def fernandez_gray_check(alg: CoframeAlgebra, s: SU3Structure) -> FernandezGrayReport:
    """Closedness and co-closedness of the cone 3-form for unit-lambda data.

    The explicit dual display is checked termwise with its own defining
    relation for the rotated derivative, I(d omega) := Im Omega / lambda.
    (The plain slot action of J on d omega differs from that object by the
    factor 3 lambda^2; the residual of the relation at unit lambda is
    reported separately.)
    """
    snorm, lam = normalize_to_unit_lambda(s)
    rho = build_cone_3form(snorm, alg)
    g6 = base_metric_oriented(snorm)
    drho = d_cone(alg, rho)
    star_rho = hodge_cone(g6, rho)

    # display: *rho = (3/2) t^4 omega^2 - 3 t^3 dt ^ I(d omega), I(d omega) = Im Omega
    w2 = wedge(snorm.omega, snorm.omega)
    i_domega = snorm.Omega.imag()
    expect = ConeForm.from_terms(4, [(4, False, 1.5 * w2), (3, True, -3.0 * i_domega)])
    star_res = (star_rho - expect).norm() / max(1.0, star_rho.norm())

    slot_action = j_multiplicative(snorm.J, d_invariant(alg, snorm.omega))
    rot_res = ((1.0 / 3.0) * slot_action - i_domega).norm() / max(1.0, i_domega.norm())

    dstar = d_cone(alg, star_rho)
    scale = max(1.0, rho.norm())
    return FernandezGrayReport(
        d_rho_residual=drho.norm() / scale,
        dstar_rho_residual=dstar.norm() / max(1.0, star_rho.norm()),
        star_formula_residual=star_res,
        rotation_relation_residual=rot_res,
        lambda_rescale=lam,
    )


@dataclass(frozen=True)
class MetricRoundtripReport:
    stable: bool
    ratio: float                  # scalar relating g_phi to the cone metric at t = 1
    ratio_spread: float           # max componentwise deviation, relative
    stabilizer_dimension: int


def cone_metric_at_one(s: SU3Structure) -> np.ndarray:
    g6 = hermitian_metric(s.J, s.omega)
    out = np.zeros((7, 7))
    out[:6, :6] = g6.matrix
    out[6, 6] = 1.0
    return out


def metric_roundtrip(alg: CoframeAlgebra, s: SU3Structure) -> MetricRoundtripReport:
    """Extract the metric from the cone 3-form at t = 1 and compare shapes.

    The contract for solution data: the extracted metric is a constant
    positive multiple of t^2 g + dt^2 across all components; the constant is
    a fixture of the normalization conventions, identical for the planted
    flat model and for solved structures.
    """
    snorm, _ = normalize_to_unit_lambda(s)
    rho = build_cone_3form(snorm, alg)
    phi = rho.at_t(1.0)
    rep = stability_check(phi)
    gc = cone_metric_at_one(snorm)
    if not rep.stable:
        return MetricRoundtripReport(False, 0.0, np.inf, rep.stabilizer_dimension)
    r = float(np.sum(rep.metric * gc) / np.sum(gc * gc))
    spread = float(np.max(np.abs(rep.metric - r * gc)) / (abs(r) * np.max(np.abs(gc))))
    return MetricRoundtripReport(True, r, spread, rep.stabilizer_dimension)
