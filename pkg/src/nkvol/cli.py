"""Command-line front end with deterministic machine-readable reports.

Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on input
errors (malformed manifests, unknown files, bad arguments).  With `--json`
the output is a single report object printed with sorted keys and
shortest-round-trip floats, so identical inputs produce byte-identical
output; wall-clock timing appears only in the human-readable format.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from .multilinear import Form
from .frame_manifold import Manifest, catalog, catalog_names, check_jacobi, d_invariant
from .acs import AlmostComplexStructure, bidegree_project
from .conventions import constants_table
from .hermitian_torsion import alt12_analysis, conformal_solve, norm30_sq, torsion_criterion
from .nijenhuis import cartan_compatibility, nijenhuis_via_brackets, nijenhuis_via_d, volume_form
from .nk_su3 import SU3Structure, nk_equivalence_suite, solve_Omega
from .g2_cone import fernandez_gray_check, metric_roundtrip, stability_check
from .variation_opt import (
    criticality_test,
    delta_basis,
    find_critical,
    psi_gradient_analytic,
    psi_value,
)

__all__ = ["main", "run"]


class InputError(Exception):
    pass


def _load(path: str) -> tuple[Manifest, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as ex:
        raise InputError(f"cannot read manifest: {ex}") from ex
    digest = hashlib.sha256(raw).hexdigest()
    try:
        manifest = Manifest.from_json(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError, json.JSONDecodeError) as ex:
        raise InputError(f"malformed manifest {path}: {ex}") from ex
    return manifest, digest


def _acs_of(manifest: Manifest) -> AlmostComplexStructure:
    if manifest.J is None:
        raise InputError("manifest carries no J matrix")
    try:
        return AlmostComplexStructure(manifest.J)
    except ValueError as ex:
        raise InputError(f"invalid J: {ex}") from ex


def _pick_omega(alg, J, manifest: Manifest):
    """Manifest omega when present, else the conformal-solver candidate."""
    if manifest.omega is not None:
        return manifest.omega, "manifest"
    rep = conformal_solve(alg, J)
    if rep.normalized_omega is not None:
        return rep.normalized_omega, "conformal_solve normalized"
    if rep.candidate_positive:
        return rep.candidate, "conformal_solve candidate"
    return None, "none available"


# ---------------------------------------------------------------------------
# subcommand handlers: return (checks, verdicts) dictionaries
# ---------------------------------------------------------------------------

def _cmd_check(manifest: Manifest):
    alg = manifest.algebra()
    rep = check_jacobi(alg)
    checks = {
        "jacobi_residual_dd": rep.residual_dd,
        "jacobi_residual_bracket": rep.residual_bracket,
    }
    verdicts = {"jacobi": rep.holds}
    if manifest.J is not None:
        j_res = float(np.max(np.abs(manifest.J @ manifest.J + np.eye(manifest.dimension))))
        checks["j_squared_residual"] = j_res
        verdicts["j_valid"] = bool(j_res <= 1e-10)
    return checks, verdicts


def _cmd_nijenhuis(manifest: Manifest):
    alg = manifest.algebra()
    J = _acs_of(manifest)
    fr = J.frame()
    nb = nijenhuis_via_brackets(alg, J, frame=fr)
    nd = nijenhuis_via_d(alg, J, frame=fr)
    agree = float(np.max(np.abs(nb.matrix - nd.matrix)))
    scale = max(1.0, float(np.max(np.abs(nb.matrix))))
    vd = volume_form(nb)
    checks = {
        "route_agreement_residual": agree / scale,
        "det_abs": float(abs(np.linalg.det(nb.matrix))),
        "psi": vd.psi,
        "nondegenerate": nb.nondegenerate,
    }
    omega, source = _pick_omega(alg, J, manifest)
    if omega is not None:
        try:
            checks["cartan_residual"] = cartan_compatibility(alg, J, omega)
            checks["cartan_omega_source"] = source
        except ValueError:
            pass
    verdicts = {"routes_agree": bool(agree <= 1e-12 * scale)}
    if "cartan_residual" in checks:
        verdicts["cartan_identity"] = bool(checks["cartan_residual"] <= 1e-10)
    return checks, verdicts


def _cmd_torsion(manifest: Manifest):
    alg = manifest.algebra()
    J = _acs_of(manifest)
    rep = conformal_solve(alg, J)
    checks = {
        "solution_dimension": rep.solution_dimension,
        "candidate_positive": rep.candidate_positive,
        "candidate_residual": rep.candidate_residual,
        "singular_values": [float(x) for x in rep.singular_values],
    }
    omega, source = _pick_omega(alg, J, manifest)
    if omega is None:
        raise InputError("no positive Hermitian candidate available for the criterion")
    crit = torsion_criterion(alg, J, omega)
    checks.update({
        "omega_source": source,
        "skewness_residual": crit.skewness_residual,
        "rho_norm": crit.rho_norm,
    })
    if rep.normalized_omega is not None:
        crit_n = torsion_criterion(alg, J, rep.normalized_omega)
        checks["normalized_gauge_residual"] = abs(
            norm30_sq(rep.normalized_omega, crit_n.lambda30_component) - 1.0
        )
    verdicts = {"admits_connection": crit.admits_connection}
    return checks, verdicts


def _cmd_nk(manifest: Manifest):
    alg = manifest.algebra()
    J = _acs_of(manifest)
    omega, source = _pick_omega(alg, J, manifest)
    if omega is None:
        raise InputError("no positive Hermitian candidate available for the suite")
    suite = nk_equivalence_suite(alg, J, omega)
    checks = {
        "omega_source": source,
        "skewness_residual": suite.skewness_residual,
        "offshape_residual": suite.offshape_residual,
        "lambda": suite.lam,
        "degenerate": suite.degenerate,
        "hypothesis_ok": suite.hypothesis_ok,
        "nabla_antisymmetry_residual": suite.nabla_report.antisymmetry_residual,
        "nabla_identification_residual": suite.nabla_report.identification_residual,
        "strictness_min": suite.nabla_report.strictness_min,
    }
    if suite.equation_report is not None:
        checks["structure_equation_residuals"] = [
            suite.equation_report.r1, suite.equation_report.r2, suite.equation_report.r3,
        ]
    verdicts = {
        "torsion_criterion": suite.torsion_ok,
        "structure_equations": suite.equations_ok,
        "nabla_antisymmetric_strict": suite.nabla_ok,
        "suite_consistent": suite.consistent(),
    }
    return checks, verdicts


def _cmd_cone(manifest: Manifest):
    alg = manifest.algebra()
    J = _acs_of(manifest)
    omega, source = _pick_omega(alg, J, manifest)
    if omega is None:
        raise InputError("no positive Hermitian candidate available for the cone")
    solved = solve_Omega(alg, J, omega)
    if not solved.ok:
        return (
            {"omega_source": source, "offshape_residual": solved.offshape_residual,
             "reason": solved.reason},
            {"shape_equations": False},
        )
    if manifest.Omega3 is not None:
        s = SU3Structure(J, omega, manifest.Omega3, solved.lam)
    else:
        s = SU3Structure(J, omega, solved.Omega, solved.lam)
    fg = fernandez_gray_check(alg, s)
    mr = metric_roundtrip(alg, s)
    checks = {
        "omega_source": source,
        "lambda": solved.lam,
        "lambda_rescale": fg.lambda_rescale,
        "d_rho_residual": fg.d_rho_residual,
        "dstar_rho_residual": fg.dstar_rho_residual,
        "star_formula_residual": fg.star_formula_residual,
        "roundtrip_ratio": mr.ratio,
        "roundtrip_spread": mr.ratio_spread,
        "stabilizer_dimension": mr.stabilizer_dimension,
    }
    verdicts = {
        "shape_equations": True,
        "closed": bool(fg.d_rho_residual <= 1e-9),
        "coclosed": bool(fg.dstar_rho_residual <= 1e-9),
        "dual_formula": bool(fg.star_formula_residual <= 1e-10),
        "stable": mr.stable,
        "stabilizer_14": bool(mr.stabilizer_dimension == 14),
        "metric_proportional": bool(mr.ratio_spread <= 1e-9),
    }
    return checks, verdicts


def _cmd_functional(manifest: Manifest, gradient: bool):
    alg = manifest.algebra()
    J = _acs_of(manifest)
    checks = {"psi": psi_value(alg, J)}
    verdicts = {}
    crit_rep = None
    try:
        omega, source = _pick_omega(alg, J, manifest)
        if omega is not None:
            crit_rep = criticality_test(alg, J, omega if manifest.omega is not None else None)
            checks["criticality_residual"] = crit_rep.residual
            checks["criticality_verdict"] = crit_rep.verdict
    except (ValueError, InputError):
        pass
    if gradient:
        if crit_rep is None or crit_rep.degenerate:
            raise InputError("gradient undefined: Nijenhuis tensor degenerate")
        omega = crit_rep.omega
        comps = [psi_gradient_analytic(alg, J, omega, d) for d in delta_basis()]
        checks["gradient_components"] = comps
        checks["gradient_max_abs"] = float(np.max(np.abs(comps)))
    return checks, verdicts


def _cmd_optimize(manifest: Manifest, tol: float, max_iter: int, seed: int,
                  emit: str | None):
    alg = manifest.algebra()
    J = _acs_of(manifest)
    res = find_critical(alg, J, tol=tol, max_iter=max_iter, seed=seed)
    checks = {
        "iterations": res.iterations,
        "trace": res.trace,
        "final_objective": res.trace[-1] if res.trace else None,
        "reason": res.reason,
        "monotone": bool(all(res.trace[i + 1] <= res.trace[i]
                             for i in range(len(res.trace) - 1))),
    }
    verdicts = {"converged": res.converged}
    if res.converged and res.suite is not None:
        verdicts["nk_suite"] = res.suite.all_true
        checks["psi_final"] = psi_value(alg, res.J)
        checks["lambda"] = res.suite.lam
    if emit and res.converged:
        solved = solve_Omega(alg, res.J, res.omega)
        from .hermitian_torsion import hermitian_metric

        g = hermitian_metric(res.J, res.omega)
        out = Manifest(manifest.name + "_critical", manifest.dimension,
                       manifest.structure_constants, J=res.J.matrix, metric=g.matrix,
                       omega=res.omega, Omega3=solved.Omega)
        out.save(emit)
        checks["emitted"] = emit
    return checks, verdicts


def _cmd_alt12(manifest: Manifest):
    J = _acs_of(manifest)
    rep = alt12_analysis(J)
    checks = {
        "rank_full": rep.rank_full,
        "rank_hermitian": rep.rank_hermitian,
        "span_with_cokernel": rep.span_with_cokernel,
        "target_dimension": rep.target_dimension,
    }
    verdicts = {
        "alt12_isomorphism": rep.rank_full == 90,
        "alt12_injective_hermitian": rep.rank_hermitian == 54,
        "alt12_cokernel_spans": rep.span_with_cokernel == rep.target_dimension == 72,
    }
    return checks, verdicts


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _emit_report(report: dict, as_json: bool, elapsed: float) -> None:
    if as_json:
        print(json.dumps(_sanitize(report), indent=2, sort_keys=True))
        return
    print(f"command: {report['command']}")
    if "manifest" in report:
        print(f"manifest: {report['manifest']['name']} ({report['manifest']['sha256'][:12]})")
    if "error" in report:
        print(f"error: {report['error']}")
    for key, val in report.get("checks", {}).items():
        print(f"  {key}: {_human(val)}")
    for key, val in report.get("verdicts", {}).items():
        print(f"  [{'PASS' if val else 'FAIL'}] {key}")
    print(f"elapsed: {elapsed:.3f}s")


def _human(val):
    if isinstance(val, float):
        return f"{val:.6g}"
    if isinstance(val, (list, tuple)) and val and isinstance(val[0], float):
        if len(val) > 8:
            return "[" + ", ".join(f"{v:.6g}" for v in val[:8]) + ", ...]"
        return "[" + ", ".join(f"{v:.6g}" for v in val) + "]"
    return val


def _build_parser() -> argparse.ArgumentParser:
    # --json is accepted anywhere on the line; it is stripped by run() before
    # parsing, so it appears here only for the help text
    p = argparse.ArgumentParser(prog="nkvol",
                                description="checks and optimization for invariant "
                                            "almost complex structures on coframe models")
    p.add_argument("--json", action="store_true",
                   help="machine-readable report output (accepted with any subcommand)")
    sub = p.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="built-in model catalog")
    catsub = cat.add_subparsers(dest="catalog_command", required=True)
    catsub.add_parser("list", help="list catalog names")
    emit = catsub.add_parser("emit", help="write a catalog manifest")
    emit.add_argument("name")
    emit.add_argument("--seed", type=int, default=None)
    emit.add_argument("--magnitude", type=float, default=0.05)
    emit.add_argument("--out", default=None)

    for name, helptext in [
        ("check", "Jacobi gate and J validity"),
        ("nijenhuis", "two-route tensor, determinant, volume density"),
        ("torsion", "skew-torsion criterion and conformal solve"),
        ("nk", "three-way equivalence suite"),
        ("cone", "cone 3-form: stability, harmonicity, metric roundtrip"),
        ("alt12", "antisymmetrization-operator ranks"),
    ]:
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("file")

    fun = sub.add_parser("functional", help="volume density and optional gradient")
    fun.add_argument("file")
    fun.add_argument("--gradient", action="store_true")

    opt = sub.add_parser("optimize", help="search for a critical structure")
    opt.add_argument("file")
    opt.add_argument("--tol", type=float, default=1e-12)
    opt.add_argument("--max-iter", type=int, default=100)
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--emit", default=None, help="write the solved manifest here")
    return p


def run(argv: list[str]) -> int:
    argv = list(argv)
    as_json = "--json" in argv
    argv = [a for a in argv if a != "--json"]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return 2 if ex.code not in (0, None) else 0
    args.json = as_json
    started = time.monotonic()

    report: dict = {"command": args.command, "constants": constants_table()}
    try:
        if args.command == "catalog":
            if args.catalog_command == "list":
                report["checks"] = {"catalog": list(catalog_names())}
                report["verdicts"] = {}
            else:
                try:
                    manifest = catalog(args.name, seed=args.seed, magnitude=args.magnitude)
                except ValueError as ex:
                    raise InputError(str(ex)) from ex
                if args.out:
                    manifest.save(args.out)
                    report["checks"] = {"written": args.out, "name": manifest.name}
                else:
                    report["checks"] = {"manifest": manifest.to_dict()}
                report["verdicts"] = {}
        else:
            manifest, digest = _load(args.file)
            report["manifest"] = {"name": manifest.name, "sha256": digest}
            if args.command == "check":
                checks, verdicts = _cmd_check(manifest)
            elif args.command == "nijenhuis":
                checks, verdicts = _cmd_nijenhuis(manifest)
            elif args.command == "torsion":
                checks, verdicts = _cmd_torsion(manifest)
            elif args.command == "nk":
                checks, verdicts = _cmd_nk(manifest)
            elif args.command == "cone":
                checks, verdicts = _cmd_cone(manifest)
            elif args.command == "alt12":
                checks, verdicts = _cmd_alt12(manifest)
            elif args.command == "functional":
                checks, verdicts = _cmd_functional(manifest, args.gradient)
            elif args.command == "optimize":
                checks, verdicts = _cmd_optimize(manifest, args.tol, args.max_iter,
                                                 args.seed, args.emit)
            else:  # pragma: no cover
                raise InputError(f"unknown command {args.command}")
            report["checks"] = checks
            report["verdicts"] = verdicts
    except InputError as ex:
        report["error"] = str(ex)
        _emit_report(report, args.json, time.monotonic() - started)
        return 2
    except ValueError as ex:
        report["error"] = f"invalid input: {ex}"
        _emit_report(report, args.json, time.monotonic() - started)
        return 2

    _emit_report(report, args.json, time.monotonic() - started)
    return 0 if all(report["verdicts"].values()) else 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
