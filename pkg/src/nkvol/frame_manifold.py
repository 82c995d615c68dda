"""Homogeneous coframe models: structure constants, invariant calculus, manifests.

A model is an invariant coframe e^1..e^n with constant structure coefficients
c^i_{jk}, encoding d e^i = -1/2 c^i_{jk} e^j ^ e^k and the frame brackets
[e_j, e_k] = c^i_{jk} e_i.  All geometry downstream (exterior derivative,
Levi-Civita data, Nijenhuis tensors) reduces to finite linear algebra in these
coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np

from .multilinear import Form, Metric, basis_form, index_tuples, merge_sign, wedge, zero_form

__all__ = [
    "CoframeAlgebra",
    "JacobiReport",
    "Manifest",
    "catalog",
    "catalog_names",
    "check_jacobi",
    "covariant_derivative_form",
    "d_invariant",
    "levi_civita",
]

JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class CoframeAlgebra:
    """An n-dimensional invariant coframe with structure constants c^i_{jk}."""

    structure_constants: np.ndarray  # shape (n, n, n): c[i, j, k] = c^i_{jk}

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=np.float64)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError("structure constants must have shape (n, n, n)")
        if not np.array_equal(c, -np.swapaxes(c, 1, 2)):
            raise ValueError("structure constants must be exactly antisymmetric in (j, k)")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "structure_constants", c)

    @property
    def dimension(self) -> int:
        return self.structure_constants.shape[0]

    def bracket(self, u, w) -> np.ndarray:
        """[u, w]^i = c^i_{jk} u^j w^k for constant-coefficient frame vectors."""
        u = np.asarray(u, dtype=np.complex128)
        w = np.asarray(w, dtype=np.complex128)
        return np.einsum("ijk,j,k->i", self.structure_constants, u, w)

    @cached_property
    def coframe_differentials(self) -> tuple[Form, ...]:
        """d e^i = -1/2 c^i_{jk} e^j ^ e^k as 2-forms."""
        n = self.dimension
        out = []
        pos = {t: p for p, t in enumerate(index_tuples(n, 2))}
        for i in range(n):
            coeffs = np.zeros(comb(n, 2), dtype=np.complex128)
            for j in range(n):
                for k in range(j + 1, n):
                    # only j < k; the factor 1/2 cancels against the (j,k)/(k,j) pair
                    coeffs[pos[(j + 1, k + 1)]] = -self.structure_constants[i, j, k]
            out.append(Form(n, 2, coeffs))
        return tuple(out)


def d_invariant(alg: CoframeAlgebra, a: Form) -> Form:
    """Maurer-Cartan differential extended as an antiderivation to all degrees."""
    n, k = a.dimension, a.degree
    if n != alg.dimension:
        raise ValueError("form dimension does not match the algebra")
    if k >= n:
        raise ValueError("cannot differentiate a top-degree form")
    de = alg.coframe_differentials
    out = zero_form(n, k + 1)
    if k == 0:
        return out  # invariant functions are constant
    for pos, idx in enumerate(index_tuples(n, k)):
        c = a.coeffs[pos]
        if c == 0:
            continue
        for slot, i in enumerate(idx):
            rest = idx[:slot] + idx[slot + 1:]
            term = de[i - 1] if not rest else wedge(de[i - 1], basis_form(n, rest))
            out = out + ((-1) ** slot * c) * term
    return out


@dataclass(frozen=True)
class JacobiReport:
    holds: bool
    residual_dd: float      # max_i |d(d e^i)|
    residual_bracket: float  # max over the cyclic bracket sums

    @property
    def residual(self) -> float:
        return max(self.residual_dd, self.residual_bracket)


def check_jacobi(alg: CoframeAlgebra, tol: float = JACOBI_TOL) -> JacobiReport:
    """Well-posedness gate: d after d annihilates the coframe iff Jacobi holds.

    Both formulations are computed; they must agree (this is asserted by the
    test-suite on valid and invalid constants, not silently assumed here).
    """
    n = alg.dimension
    res_dd = 0.0
    for i in range(n):
        res_dd = max(res_dd, d_invariant(alg, alg.coframe_differentials[i]).norm())
    c = alg.structure_constants
    # sum_m ( c^m_{jk} c^l_{im} + c^m_{ki} c^l_{jm} + c^m_{ij} c^l_{km} )
    cyc = (
        np.einsum("mjk,lim->lijk", c, c)
        + np.einsum("mki,ljm->lijk", c, c)
        + np.einsum("mij,lkm->lijk", c, c)
    )
    res_br = float(np.max(np.abs(cyc))) if cyc.size else 0.0
    return JacobiReport(holds=bool(res_dd <= tol), residual_dd=res_dd, residual_bracket=res_br)


def levi_civita(alg: CoframeAlgebra, g: Metric) -> np.ndarray:
    """Koszul connection coefficients Gamma[k, i, j]: nabla_{e_i} e_j = Gamma^k_{ij} e_k.

    2 g(nabla_{e_i} e_j, e_k) = g([e_i,e_j], e_k) - g([e_j,e_k], e_i) + g([e_k,e_i], e_j)
    """
    n = alg.dimension
    if g.dimension != n:
        raise ValueError("metric dimension mismatch")
    c = alg.structure_constants
    gm = g.matrix
    # b[i, j, k] = g([e_i, e_j], e_k)
    b = np.einsum("mij,mk->ijk", c, gm)
    rhs = 0.5 * (b - np.einsum("jki->ijk", b) + np.einsum("kij->ijk", b))
    ginv = g.inverse()
    # Gamma^m_{ij} g_{mk} = rhs[i, j, k]
    gamma = np.einsum("km,ijm->kij", ginv, rhs)
    return gamma


def covariant_derivative_form(gamma: np.ndarray, a: Form) -> tuple[Form, ...]:
    """The family (nabla_{e_i} a)_i for an invariant form: pure connection terms."""
    n = gamma.shape[1]
    k = a.degree
    if k == 0:
        return tuple(zero_form(n, 0) for _ in range(n))
    pos = {t: p for p, t in enumerate(index_tuples(n, k))}
    outs = []
    for i in range(n):
        coeffs = np.zeros(comb(n, k), dtype=np.complex128)
        for p, idx in enumerate(index_tuples(n, k)):
            # (nabla_i a)(e_{j1},..) = -sum_slots a(.., nabla_i e_{js}, ..)
            total = 0.0 + 0.0j
            for slot, j in enumerate(idx):
                for m in range(n):
                    gcoef = gamma[m, i, j - 1]
                    if gcoef == 0.0:
                        continue
                    rep = idx[:slot] + (m + 1,) + idx[slot + 1:]
                    if len(set(rep)) != k:
                        continue
                    sign = _sort_sign(rep)
                    total -= gcoef * sign * a.coeffs[pos[tuple(sorted(rep))]]
            coeffs[p] = total
        outs.append(Form(n, k, coeffs))
    return tuple(outs)


def _sort_sign(indices) -> int:
    lst = list(indices)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    return sign


# ---------------------------------------------------------------------------
# Manifest I/O
# ---------------------------------------------------------------------------

_MANIFEST_FIELDS = {"name", "dimension", "structure_constants", "J", "metric", "omega", "Omega3"}


@dataclass(frozen=True)
class Manifest:
    """Serializable model description; see the JSON schema in the README."""

    name: str
    dimension: int
    structure_constants: np.ndarray
    J: np.ndarray | None = None
    metric: np.ndarray | None = None
    omega: Form | None = None
    Omega3: Form | None = None

    def algebra(self) -> CoframeAlgebra:
        return CoframeAlgebra(self.structure_constants)

    # -- serialization -------------------------------------------------------

    @staticmethod
    def from_dict(data: dict) -> "Manifest":
        if not isinstance(data, dict):
            raise ValueError("manifest must be a JSON object")
        unknown = set(data) - _MANIFEST_FIELDS
        if unknown:
            raise ValueError(f"unknown manifest fields: {sorted(unknown)}")
        for req in ("name", "dimension", "structure_constants"):
            if req not in data:
                raise ValueError(f"manifest missing required field '{req}'")
        name = data["name"]
        n = data["dimension"]
        if not isinstance(n, int) or not (1 <= n <= 7):
            raise ValueError("dimension must be an integer in 1..7")
        c = np.zeros((n, n, n), dtype=np.float64)
        for entry in data["structure_constants"]:
            keys = set(entry)
            if keys != {"i", "j", "k", "value"}:
                raise ValueError(f"bad structure-constant entry keys: {sorted(keys)}")
            i, j, k, v = entry["i"], entry["j"], entry["k"], entry["value"]
            for ix in (i, j, k):
                if not isinstance(ix, int) or not (1 <= ix <= n):
                    raise ValueError(f"structure-constant index out of range: {entry}")
            if not j < k:
                raise ValueError(f"structure constants must be stored with j < k: {entry}")
            c[i - 1, j - 1, k - 1] = v
            c[i - 1, k - 1, j - 1] = -v
        J = _read_matrix(data.get("J"), n, "J")
        metric = _read_matrix(data.get("metric"), n, "metric")
        omega = _read_form(data.get("omega"), n, 2, "omega")
        Omega3 = _read_form(data.get("Omega3"), n, 3, "Omega3")
        return Manifest(name, n, c, J, metric, omega, Omega3)

    @staticmethod
    def from_json(text: str) -> "Manifest":
        return Manifest.from_dict(json.loads(text))

    @staticmethod
    def load(path) -> "Manifest":
        with open(path, "r", encoding="utf-8") as fh:
            return Manifest.from_json(fh.read())

    def to_dict(self) -> dict:
        n = self.dimension
        sc = []
        for i in range(n):
            for j in range(n):
                for k in range(j + 1, n):
                    v = self.structure_constants[i, j, k]
                    if v != 0.0:
                        sc.append({"i": i + 1, "j": j + 1, "k": k + 1, "value": float(v)})
        out = {"name": self.name, "dimension": n, "structure_constants": sc}
        if self.J is not None:
            out["J"] = [[float(x) for x in row] for row in self.J]
        if self.metric is not None:
            out["metric"] = [[float(x) for x in row] for row in self.metric]
        if self.omega is not None:
            out["omega"] = _form_entries(self.omega)
        if self.Omega3 is not None:
            out["Omega3"] = _form_entries(self.Omega3)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def _read_matrix(raw, n: int, field_name: str):
    if raw is None:
        return None
    m = np.asarray(raw, dtype=np.float64)
    if m.shape != (n, n):
        raise ValueError(f"field '{field_name}' must be a {n}x{n} row-major matrix")
    return m


def _read_form(raw, n: int, degree: int, field_name: str):
    if raw is None:
        return None
    coeffs = np.zeros(comb(n, degree), dtype=np.complex128)
    pos = {t: p for p, t in enumerate(index_tuples(n, degree))}
    for entry in raw:
        if set(entry) != {"indices", "re", "im"}:
            raise ValueError(f"bad {field_name} entry keys: {sorted(set(entry))}")
        idx = tuple(entry["indices"])
        if len(idx) != degree or idx != tuple(sorted(idx)) or len(set(idx)) != degree:
            raise ValueError(f"{field_name} indices must be strictly increasing: {entry}")
        if not all(isinstance(i, int) and 1 <= i <= n for i in idx):
            raise ValueError(f"{field_name} index out of range: {entry}")
        coeffs[pos[idx]] = entry["re"] + 1j * entry["im"]
    return Form(n, degree, coeffs)


def _form_entries(f: Form) -> list:
    out = []
    for p, idx in enumerate(index_tuples(f.dimension, f.degree)):
        c = f.coeffs[p]
        if c != 0:
            out.append({"indices": list(idx), "re": float(c.real), "im": float(c.imag)})
    return out


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def _su2_block(c: np.ndarray, offset: int):
    """Write c^i_{jk} = -eps_{ijk} on indices offset..offset+2 (de^1 = e^23 cyclically)."""
    eps = [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
           (0, 2, 1, -1.0), (1, 0, 2, -1.0), (2, 1, 0, -1.0)]
    for i, j, k, v in eps:
        c[offset + i, offset + j, offset + k] = -v


def _standard_torus_J(n: int = 6) -> np.ndarray:
    # coframe action J e^{2k-1} = e^{2k}, J e^{2k} = -e^{2k-1}
    J = np.zeros((n, n))
    for k in range(0, n, 2):
        J[k, k + 1] = 1.0
        J[k + 1, k] = -1.0
    return J


def _s3s3_J() -> np.ndarray:
    # coframe action J e^i = e^{i'}, J e^{i'} = -e^i across the two factors
    J = np.zeros((6, 6))
    for i in range(3):
        J[i, i + 3] = 1.0
        J[i + 3, i] = -1.0
    return J


def catalog_names() -> tuple[str, ...]:
    return ("torus6", "s3s3", "s3s3_perturbed")


def catalog(name: str, seed: int | None = None, magnitude: float = 0.05) -> Manifest:
    """Built-in models.

    torus6           flat abelian coframe with the standard block J.
    s3s3             su(2)+su(2) constants normalized so d e^1 = e^23 (and
                     d e^4 = e^56), the factor-swapping J on the coframe, and
                     the identity product metric as a starting point.  This is
                     a *starting* structure: the verified solution data is
                     produced by the optimizer and stored as a derived fixture.
    s3s3_perturbed   s3s3 with a seeded pseudo-random deformation of J of the
                     given magnitude, renormalized back to an almost complex
                     structure (J^2 = -Id) by eigenspace projection.
    """
    if name == "torus6":
        c = np.zeros((6, 6, 6))
        return Manifest("torus6", 6, c, J=_standard_torus_J(), metric=np.eye(6))
    if name == "s3s3":
        c = np.zeros((6, 6, 6))
        _su2_block(c, 0)
        _su2_block(c, 3)
        return Manifest("s3s3", 6, c, J=_s3s3_J(), metric=np.eye(6))
    if name == "s3s3_perturbed":
        if seed is None:
            raise ValueError("s3s3_perturbed requires a seed")
        base = catalog("s3s3")
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((6, 6))
        noise *= magnitude / np.linalg.norm(noise, 2)
        from .acs import project_to_acs  # local import: acs depends on multilinear only

        Jp = project_to_acs(base.J + noise)
        return Manifest(f"s3s3_perturbed_{seed}", 6, base.structure_constants,
                        J=Jp, metric=np.eye(6))
    raise ValueError(f"unknown catalog name '{name}' (have {catalog_names()})")
