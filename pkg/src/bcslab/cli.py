"""Command-line interface: config ingestion, experiment subcommands, reports.

Subcommands: lattice, solve-gap, solve-new-gap, spectrum, energy, verify,
report.  Exit codes: 0 success / all checks pass, 1 check failures,
2 usage or config errors, 3 resource or convergence errors.

Configs are JSON; see README for the schema.  Human-readable tables go to
stdout, diagnostics to stderr, machine-readable reports to --out.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    VerificationReport,
    condensation_energy,
    delta_E_formula,
    ebcs_formula,
    free_fermi_energy,
    hm_spectrum_check,
    run_verification,
)
from .errors import ConvergenceError, ResourceLimitError, ValidationError
from .fock import expectation
from .gapsolve import GapSolution, solve_gap, solve_new_gap
from .hamiltonian import OperatorBundle, build_HM
from .model import (
    Kernel,
    ModeTable,
    build_lambda,
    explicit_modes,
    separable_kernel,
    validate_kernel,
)
from .states import bcs_state, correction_state, fermi_vacuum, normalized_psi, quasi_ops

EXIT_OK = 0
EXIT_CHECK_FAILURES = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


@dataclass
class RunConfig:
    mt: ModeTable
    kernel: Kernel
    equation: str = "classic"
    init: float = 1.0
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10000
    checks: object = "all"
    out_dir: str | None = None
    formats: tuple = ("json", "csv")
    seed: int = 0


def load_config(path: str) -> RunConfig:
    """Parse and validate a JSON config; raises ValidationError on any defect."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a JSON object")

    lattice = raw.get("lattice")
    if not isinstance(lattice, dict):
        raise ValidationError("config needs a 'lattice' object")
    physics = raw.get("physics", {})
    mu = float(physics.get("mu", 0.0))
    hbar = float(physics.get("hbar", 1.0))
    mass = float(physics.get("m", 0.5))

    has_ball = "L" in lattice and "kmax" in lattice
    has_modes = "modes" in lattice
    if has_ball == has_modes:
        raise ValidationError("lattice must specify exactly one of {L,kmax} or {modes}")
    if has_ball:
        mt = build_lambda(float(lattice["L"]), float(lattice["kmax"]), mu=mu, hbar=hbar, mass=mass)
    else:
        mt = explicit_modes(
            [tuple(k) for k in lattice["modes"]],
            xi_override=lattice.get("xi"),
            L=float(lattice.get("L", 2.0 * math.pi)),
            mu=mu,
            hbar=hbar,
            mass=mass,
        )

    kspec = raw.get("kernel")
    if not isinstance(kspec, dict):
        raise ValidationError("config needs a 'kernel' object")
    has_matrix = "matrix" in kspec
    has_sep = "separable" in kspec
    if has_matrix == has_sep:
        raise ValidationError("kernel must specify exactly one of {matrix} or {separable}")
    if has_matrix:
        kernel = Kernel(u=np.asarray(kspec["matrix"], dtype=np.float64))
    else:
        sep = kspec["separable"]
        shell = None
        if "shell" in sep:
            lo, hi = float(sep["shell"][0]), float(sep["shell"][1])
            shell = lambda knorm: lo <= knorm <= hi  # noqa: E731
        kernel = separable_kernel(mt, float(sep["g"]), shell=shell)
    # reject a bad kernel before any matrix is built
    violations = validate_kernel(kernel, mt)
    if violations:
        raise ValidationError("kernel constraint violations: " + "; ".join(violations))

    solver = raw.get("solver", {})
    equation = solver.get("equation", "classic")
    if equation not in ("classic", "new"):
        raise ValidationError(f"solver.equation must be 'classic' or 'new', got {equation!r}")
    tol = float(solver.get("tol", 1e-10))
    if tol <= 0:
        raise ValidationError("solver.tol must be positive")

    output = raw.get("output", {})
    formats = tuple(output.get("formats", ("json", "csv")))
    for fmt in formats:
        if fmt not in ("json", "csv"):
            raise ValidationError(f"unknown output format {fmt!r}")

    return RunConfig(
        mt=mt,
        kernel=kernel,
        equation=equation,
        init=float(solver.get("init", 1.0)),
        damping=float(solver.get("damping", 0.5)),
        tol=tol,
        max_iter=int(solver.get("max_iter", 10000)),
        checks=raw.get("checks", "all"),
        out_dir=output.get("dir"),
        formats=formats,
        seed=int(raw.get("seed", 0)),
    )


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if getattr(args, "max_iter", None) is not None:
        cfg.max_iter = args.max_iter
    if getattr(args, "equation", None) is not None:
        cfg.equation = args.equation
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out_dir = args.out
    if getattr(args, "format", None) is not None:
        formats = tuple(args.format.split(","))
        for fmt in formats:
            if fmt not in ("json", "csv"):
                raise ValidationError(f"unknown output format {fmt!r}")
        cfg.formats = formats
    return cfg


# ---------------------------------------------------------------------------
# report emission


def _float_repr(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def report_payload(report: VerificationReport) -> dict:
    return {"metadata": report.metadata, "checks": [asdict(c) for c in report.checks]}


def emit_report(report: VerificationReport, out_dir: str, formats=("json", "csv")) -> list:
    """Write report.json / report.csv under out_dir; returns the paths written."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in formats:
            path = out / "report.json"
            path.write_text(json.dumps(report_payload(report), indent=2, sort_keys=True) + "\n")
            written.append(path)
        if "csv" in formats:
            path = out / "report.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(
                    ["name", "formula_value", "brute_value", "deviation", "tolerance", "pass"]
                )
                for c in report.checks:
                    status = "skipped" if c.skipped else str(bool(c.passed)).lower()
                    writer.writerow(
                        [
                            c.name,
                            _float_repr(c.formula_value),
                            _float_repr(c.brute_value),
                            _float_repr(c.deviation),
                            _float_repr(c.tolerance),
                            status,
                        ]
                    )
            written.append(path)
        return written
    except OSError as exc:
        raise ResourceLimitError(f"cannot write report to {out_dir}: {exc}") from exc


def _print_check_table(report: VerificationReport) -> None:
    width = max((len(c.name) for c in report.checks), default=10)
    print(f"{'check':<{width}}  {'deviation':>12}  {'tolerance':>12}  status")
    for c in report.checks:
        if c.skipped:
            print(f"{c.name:<{width}}  {'-':>12}  {'-':>12}  SKIP ({c.reason})")
        else:
            status = "PASS" if c.passed else "FAIL"
            note = f" ({c.reason})" if c.reason else ""
            print(f"{c.name:<{width}}  {c.deviation:>12.3e}  {c.tolerance:>12.3e}  {status}{note}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_lattice(args) -> int:
    if args.config:
        mt = load_config(args.config).mt
    else:
        if args.L is None or args.kmax is None:
            raise ValidationError("lattice needs either --config or both --L and --kmax")
        mt = build_lambda(args.L, args.kmax, mu=args.mu)
    print(f"M = {mt.n_modes} modes, dimension 2^{2 * mt.n_modes} = {mt.dim}")
    print(f"{'idx':>4} {'n':>12} {'|k|':>10} {'xi':>12} {'pair':>4}")
    for i, n in enumerate(mt.nvecs):
        print(f"{i:>4} {str(n):>12} {mt.knorm(i):>10.6f} {mt.xi[i]:>12.6f} {mt.pair[i]:>4}")
    return EXIT_OK


def _solve(cfg: RunConfig, equation: str) -> GapSolution:
    if equation == "new":
        return solve_new_gap(
            cfg.mt, cfg.kernel, init=cfg.init, damping=cfg.damping, tol=cfg.tol, max_iter=cfg.max_iter
        )
    return solve_gap(
        cfg.mt, cfg.kernel, init=cfg.init, damping=cfg.damping, tol=cfg.tol, max_iter=cfg.max_iter
    )


def _print_solution(mt: ModeTable, sol: GapSolution) -> None:
    label = "trivial" if sol.trivial else ("converged" if sol.converged else "NOT CONVERGED")
    print(
        f"equation={sol.equation}  status={label}  iterations={sol.iterations}  "
        f"residual_inf={sol.residual_inf:.3e}"
    )
    header = f"{'idx':>4} {'n':>12} {'xi':>10} {'Delta':>14} {'theta':>10} {'E':>12}"
    if sol.dk is not None:
        header += f" {'D_k':>12}"
    print(header)
    energy = np.hypot(mt.xi, sol.delta.delta)
    for i, n in enumerate(mt.nvecs):
        row = (
            f"{i:>4} {str(n):>12} {mt.xi[i]:>10.4f} {sol.delta.delta[i]:>14.10f} "
            f"{sol.theta.theta[i]:>10.6f} {energy[i]:>12.8f}"
        )
        if sol.dk is not None:
            row += f" {sol.dk[i]:>12.4e}"
        print(row)
    if sol.dsum is not None:
        print(f"D = {sol.dsum:.10e}   max_k 4D_k/(D+2) = {sol.max_factor_dev:.10e}")
    if sol.clamped:
        print("note: nonnegativity clamp activated during iteration")
    if sol.nonpositive_factor:
        print(f"note: correction factor <= 0 at mode indices {list(sol.nonpositive_factor)}")
    if sol.degenerate_modes:
        print(f"note: degenerate modes (xi = Delta = 0) at indices {list(sol.degenerate_modes)}")


def _cmd_solve(args, equation: str) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    sol = _solve(cfg, equation)
    _print_solution(cfg.mt, sol)
    return EXIT_OK if sol.converged else EXIT_RESOURCE


def _states_for(cfg: RunConfig, sol: GapSolution):
    """Reference state, pair expectations w and corrected state for a solution."""
    bundle = OperatorBundle(cfg.mt, cfg.kernel)
    psi_ref = bcs_state(cfg.mt, sol.theta)
    quasi = quasi_ops(cfg.mt, sol.theta, verify=False)
    corr = correction_state(cfg.mt, cfg.kernel, sol.theta, quasi, psi_ref)
    psi = normalized_psi(psi_ref, corr)
    witness = psi if sol.equation == "new" else psi_ref
    w = np.array([expectation(witness, bundle.B[i], witness).real for i in range(cfg.mt.n_modes)])
    return bundle, psi_ref, corr, psi, w


def _cmd_spectrum(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    sol = _solve(cfg, cfg.equation)
    if not sol.converged:
        print("gap equation did not converge; no spectrum check", file=sys.stderr)
        return EXIT_RESOURCE
    bundle, psi_ref, corr, psi, w = _states_for(cfg, sol)
    hm = build_HM(cfg.mt, sol.delta, w)
    ebcs = ebcs_formula(cfg.mt, sol.theta, w)
    dev = hm_spectrum_check(hm, cfg.mt, sol.delta, ebcs)
    ground = float(np.linalg.eigvalsh(hm.toarray())[0])
    print(f"equation={sol.equation}  E_BCS={ebcs:.12f}  ground={ground:.12f}")
    print(f"spectrum multiset deviation = {dev:.3e} (tolerance 1e-09)")
    return EXIT_OK if dev <= 1e-9 else EXIT_CHECK_FAILURES


def _cmd_energy(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    sol = _solve(cfg, "classic")
    if not sol.converged:
        print("gap equation did not converge; no energy table", file=sys.stderr)
        return EXIT_RESOURCE
    bundle, psi_ref, corr, psi, w = _states_for(cfg, sol)
    psi_f = fermi_vacuum(cfg.mt)
    ebcs = ebcs_formula(cfg.mt, sol.theta, w)
    e_bcs_dense = expectation(psi_ref, bundle.H, psi_ref).real
    e_f_dense = expectation(psi_f, bundle.H, psi_f).real
    e_psi_dense = expectation(psi, bundle.H, psi).real
    cond = condensation_energy(cfg.mt, sol.delta)
    denergy = delta_E_formula(cfg.mt, cfg.kernel, sol.theta, corr.overlap)
    rows = [
        ("E_BCS (formula)", ebcs, "(Psi_B, H Psi_B)", e_bcs_dense),
        ("free sea (formula)", free_fermi_energy(cfg.mt), "(Psi_F, H Psi_F)", e_f_dense),
        ("condensation (formula)", cond, "dense difference", e_bcs_dense - e_f_dense),
        ("Delta-E (formula)", denergy, "dense difference", e_psi_dense - e_bcs_dense),
    ]
    worst = 0.0
    for name, formula, brutename, brute in rows:
        dev = abs(formula - brute)
        worst = max(worst, dev)
        print(f"{name:<24} {formula:>20.12f}   {brutename:<18} {brute:>20.12f}   dev {dev:.3e}")
    print(f"(Psi, H Psi) = {e_psi_dense:.12f}")
    return EXIT_OK if worst <= 1e-9 else EXIT_CHECK_FAILURES


def _filter_checks(report: VerificationReport, wanted) -> VerificationReport:
    if wanted == "all" or wanted is None:
        return report
    names = set(wanted)
    unknown = names - {c.name for c in report.checks}
    if unknown:
        raise ValidationError(f"unknown check names: {sorted(unknown)}")
    filtered = VerificationReport(
        checks=[c for c in report.checks if c.name in names], metadata=report.metadata
    )
    return filtered


def _cmd_verify(args, include_solutions: bool = False) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    report = run_verification(
        cfg.mt,
        cfg.kernel,
        init=cfg.init,
        damping=cfg.damping,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        seed=cfg.seed,
    )
    report = _filter_checks(report, cfg.checks)
    if include_solutions:
        for equation in ("classic", "new"):
            sol = _solve(cfg, equation)
            print(f"--- {equation} gap equation ---")
            _print_solution(cfg.mt, sol)
        print("--- verification ---")
    _print_check_table(report)
    failures = report.failures()
    if cfg.out_dir:
        written = emit_report(report, cfg.out_dir, cfg.formats)
        for path in written:
            print(f"wrote {path}")
    if failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return EXIT_CHECK_FAILURES
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcslab",
        description="Exact Fock-space checks for BCS pairing instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_lat = sub.add_parser("lattice", help="print the mode table")
    p_lat.add_argument("--config")
    p_lat.add_argument("--L", type=float)
    p_lat.add_argument("--kmax", type=float)
    p_lat.add_argument("--mu", type=float, default=0.0)

    def common(p, out=False):
        p.add_argument("--config", required=True)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--seed", type=int)
        if out:
            p.add_argument("--out")
            p.add_argument("--format")

    common(sub.add_parser("solve-gap", help="solve the classic gap equation"))
    common(sub.add_parser("solve-new-gap", help="solve the corrected gap equation"))
    p_spec = sub.add_parser("spectrum", help="mean-field spectrum vs the quasiparticle formula")
    common(p_spec)
    p_spec.add_argument("--equation", choices=("classic", "new"))
    p_en = sub.add_parser("energy", help="energy table: formulas vs dense expectations")
    common(p_en)
    p_ver = sub.add_parser("verify", help="run the full verification report")
    common(p_ver, out=True)
    p_rep = sub.add_parser("report", help="verification report plus solution tables")
    common(p_rep, out=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "lattice":
            return _cmd_lattice(args)
        if args.command == "solve-gap":
            return _cmd_solve(args, "classic")
        if args.command == "solve-new-gap":
            return _cmd_solve(args, "new")
        if args.command == "spectrum":
            return _cmd_spectrum(args)
        if args.command == "energy":
            return _cmd_energy(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "report":
            return _cmd_verify(args, include_solutions=True)
        parser.error(f"unknown command {args.command}")
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceLimitError, ConvergenceError) as exc:
        print(f"resource/convergence error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
