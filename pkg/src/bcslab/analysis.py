"""Closed-form identities vs brute-force matrix computation.

Every scalar produced by a formula here is paired with an independent
matrix-side evaluation (dense eigendecomposition, explicit state vectors,
sparse operator application); no check compares a formula to itself.
`run_verification` bundles all checks for one instance into a deterministic
report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .fock import (
    DENSE_MODE_CAP,
    adjoint,
    anticommutator,
    anticommutator_check,
    commutator,
    conjugate_series,
    expectation,
    identity_op,
    ladder_matrix,
    op_norm_inf,
)
from .gapsolve import (
    AngleTable,
    GapSolution,
    GapTable,
    correction_factor,
    dk_weights,
    gap_residual,
    new_gap_residual,
    solve_gap,
    solve_new_gap,
)
from .hamiltonian import (
    OperatorBundle,
    build_G,
    build_GB,
    build_HM,
    build_Hprime,
    pair_annihilator,
)
from .model import Kernel, ModeTable, permuted_instance, validate_kernel
from .states import (
    QuasiOps,
    bcs_state,
    bcs_state_exponential,
    correction_state,
    fermi_vacuum,
    normalized_psi,
    pair_coefficients,
    quasi_ops,
)

# identity checks sit well above double-precision accumulation error at
# desk-scale dimensions and far below any physical scale of the instances
TOL_TIGHT = 1e-12
TOL_EXPECT = 1e-11
TOL_IDENTITY = 1e-10
TOL_LOOSE = 1e-9
STRICT_MARGIN = 1e-12


@dataclass
class CheckResult:
    name: str
    formula_value: float
    brute_value: float
    deviation: float
    tolerance: float
    passed: bool
    skipped: bool = False
    reason: str = ""


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, result: CheckResult) -> None:
        self.checks.append(result)

    @property
    def all_passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not (c.passed or c.skipped)]


def _compare(name, formula, brute, tol) -> CheckResult:
    dev = abs(formula - brute)
    return CheckResult(name, float(formula), float(brute), float(dev), tol, bool(dev <= tol))


def _deviation(name, dev, tol) -> CheckResult:
    return CheckResult(name, 0.0, float(dev), float(dev), tol, bool(dev <= tol))


def _skip(name, reason) -> CheckResult:
    return CheckResult(name, math.nan, math.nan, math.nan, math.nan, True, True, reason)


# ---------------------------------------------------------------------------
# closed-form scalars


def ebcs_formula(mt: ModeTable, angles: AngleTable, w) -> float:
    """Ground energy of the mean-field Hamiltonian: sum_k (xi - E + Delta w)."""
    if angles.energy is None or angles.delta is None:
        raise ValidationError("angle table must be built from a gap table")
    w = np.asarray(w, dtype=np.float64)
    return float(np.sum(mt.xi - angles.energy + angles.delta * w))


def free_fermi_energy(mt: ModeTable) -> float:
    """Energy of the filled Fermi sea: sum_k (xi - |xi|)."""
    return float(np.sum(mt.xi - np.abs(mt.xi)))


def condensation_energy(mt: ModeTable, gap: GapTable) -> float:
    """-1/2 sum_k (E - |xi|)^2 / E, the pairing energy gain over the normal state."""
    gap.validate(mt)
    energy = np.hypot(mt.xi, gap.delta)
    num = (energy - np.abs(mt.xi)) ** 2
    terms = np.divide(num, energy, out=np.zeros_like(energy), where=energy > 0)
    return float(-0.5 * np.sum(terms))


def hm_spectrum_check(hm, mt: ModeTable, gap: GapTable, ebcs: float) -> float:
    """Max deviation between dense sigma(H_M) and the quasiparticle multiset.

    Formula side: { sum_k E_k (N_k,up + N_k,dn) + E_BCS } over all
    occupation patterns.  Dense diagonalization caps at M <= 5.
    """
    if mt.n_modes > DENSE_MODE_CAP:
        raise ResourceLimitError(
            f"dense eigendecomposition limited to M<={DENSE_MODE_CAP}, got M={mt.n_modes}"
        )
    energy = np.hypot(mt.xi, gap.delta)
    orb_energy = np.repeat(energy, 2)  # orbital j belongs to mode j//2
    idx = np.arange(mt.dim, dtype=np.int64)
    formula = np.full(mt.dim, ebcs)
    for j in range(mt.n_orbitals):
        formula += orb_energy[j] * ((idx >> j) & 1)
    dense = np.linalg.eigvalsh(hm.toarray())
    return float(np.max(np.abs(np.sort(formula) - dense)))


def delta_E_formula(mt: ModeTable, kernel: Kernel, angles: AngleTable, overlap: float) -> float:
    """Energy gain of the corrected state over the paired product state.

    Both contributions are nonpositive for an attractive kernel; the result
    must match the dense difference (Psi, H Psi) - (Psi_B, H Psi_B).
    """
    c = pair_coefficients(mt, kernel, angles)
    c2 = angles.cos_t**2
    s2 = angles.sin_t**2
    cs = angles.cos_t * angles.sin_t
    norm = 1.0 + overlap
    first = np.sum(kernel.u * (np.outer(c2, c2) + np.outer(s2, s2)) * (c @ c.T)) / norm
    second = 4.0 * np.sum(kernel.u * np.outer(cs, cs) * c**2) / norm
    return float(first + second)


def _coupling_sum(mt: ModeTable, kernel: Kernel, angles: AngleTable) -> float:
    """sum_{p,p'} U^2 (C^2 S'^2 + C'^2 S^2)^2 / (E_p + E_p')."""
    c = pair_coefficients(mt, kernel, angles)
    esum = angles.energy[:, None] + angles.energy[None, :]
    return float(np.sum(c**2 * esum))


def lemma_hm_expectation_formula(
    mt: ModeTable, kernel: Kernel, angles: AngleTable, overlap: float, ebcs: float
) -> float:
    """(Psi, H_M Psi) = E_BCS + [sum_{p,p'} U^2 (...)^2/(E_p+E_p')] / (1 + (Phi,Phi))."""
    return ebcs + _coupling_sum(mt, kernel, angles) / (1.0 + overlap)


def phi_hprime_coupling_formula(mt: ModeTable, kernel: Kernel, angles: AngleTable) -> float:
    """(Phi, H' Psi_B) = -1/2 sum_{p,p'} U^2 (...)^2 / (E_p + E_p')."""
    return -0.5 * _coupling_sum(mt, kernel, angles)


def hprime_bcs_expansion(
    mt: ModeTable, kernel: Kernel, angles: AngleTable, quasi: QuasiOps, psi_b: np.ndarray
) -> np.ndarray:
    """H' Psi_B = - sum_{k,k'} U_{k,k'} S_k^2 C_k'^2 gamma*4-string Psi_B."""
    m = mt.n_modes
    s2 = angles.sin_t**2
    c2 = angles.cos_t**2
    cre_up = [adjoint(quasi.up[i]) for i in range(m)]
    cre_dn_neg = [adjoint(quasi.dn[mt.pair[i]]) for i in range(m)]
    out = np.zeros(mt.dim, dtype=np.complex128)
    for k in range(m):
        for kp in range(m):
            u = kernel.u[k, kp]
            if u == 0.0 or k == kp:
                continue
            w = cre_dn_neg[kp] @ psi_b
            w = cre_up[kp] @ w
            w = cre_dn_neg[k] @ w
            w = cre_up[k] @ w
            out -= u * s2[k] * c2[kp] * w
    return out


def ssb_witness(mt: ModeTable, state: np.ndarray, i: int, g=None, b=None) -> complex:
    """(state, [G, B_k] state): a nonzero value certifies broken number symmetry."""
    if g is None:
        g = build_G(mt)
    if b is None:
        b = pair_annihilator(mt, i)
    return expectation(state, commutator(g, b), state)


def corollary_new_selfconsistency(
    mt: ModeTable,
    kernel: Kernel,
    new_sol: GapSolution,
    psi_tilde: np.ndarray,
    b_ops=None,
) -> float:
    """max_k |Delta~_k + sum_k' U_{k,k'} (Psi~, B_k' Psi~)| at the corrected solution.

    End-to-end test tying the corrected gap solver, the corrected state and
    the pair operators together; requires a converged solution.
    """
    if not new_sol.converged:
        raise ValidationError("corrected-equation self-consistency needs a converged solution")
    m = mt.n_modes
    if b_ops is None:
        b_ops = [pair_annihilator(mt, i) for i in range(m)]
    pair_expect = np.array(
        [expectation(psi_tilde, b_ops[i], psi_tilde).real for i in range(m)]
    )
    residual = new_sol.delta.delta + kernel.u @ pair_expect
    return float(np.max(np.abs(residual))) if m else 0.0


# ---------------------------------------------------------------------------
# the full verification pass


def _physical_scalars(mt, kernel, init, damping, tol, max_iter):
    """Order-independent scalars of an instance, for the permutation check."""
    sol = solve_gap(mt, kernel, init=init, damping=damping, tol=tol, max_iter=max_iter)
    w = 0.5 * sol.theta.sin2t
    corr = correction_state(
        mt, kernel, sol.theta, quasi_ops(mt, sol.theta, verify=False), bcs_state(mt, sol.theta)
    )
    new_sol = solve_new_gap(mt, kernel, init=init, damping=damping, tol=tol, max_iter=max_iter)
    return {
        "ebcs": ebcs_formula(mt, sol.theta, w),
        "condensation": condensation_energy(mt, sol.delta),
        "delta_e": delta_E_formula(mt, kernel, sol.theta, corr.overlap),
        "delta_sorted": np.sort(sol.delta.delta),
        "new_delta_sorted": np.sort(new_sol.delta.delta),
    }


def run_verification(
    mt: ModeTable,
    kernel: Kernel,
    init: float = 1.0,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 10000,
    seed: int = 0,
) -> VerificationReport:
    """Run every identity check for one instance, in a fixed documented order.

    Check failures are recorded in the report, never raised; infrastructure
    errors (bad kernel, dimension cap) abort with context.
    """
    report = VerificationReport()
    m = mt.n_modes
    dense_ok = m <= DENSE_MODE_CAP
    # several identities hold exactly only at a gap-equation solution, with
    # deviations proportional to the solver residual; solving tighter than the
    # certified tolerance keeps that amplification far below the check bars
    tol_solve = min(tol, 1e-12)

    violations = validate_kernel(kernel, mt)
    report.add(_deviation("kernel_constraints", float(len(violations)), 0.0))
    if violations:
        raise ValidationError("kernel violates structural constraints: " + "; ".join(violations))

    # --- operator algebra ---------------------------------------------------
    report.add(_deviation("car_relations", anticommutator_check(m), 0.0))

    bundle = OperatorBundle(mt, kernel)
    report.add(_deviation("charge_commutes_with_h", op_norm_inf(commutator(bundle.G, bundle.H)), TOL_TIGHT))

    dev_c = 0.0
    dev_h = 0.0
    for alpha in (0.3, 1.0, math.pi):
        phase = np.exp(1j * alpha)
        for j in range(mt.n_orbitals):
            c_op = ladder_matrix(j, m)
            rotated = conjugate_series(c_op, bundle.G, alpha, tol=1e-12)
            dev_c = max(dev_c, op_norm_inf(rotated - phase * c_op))
        dev_h = max(dev_h, op_norm_inf(conjugate_series(bundle.H, bundle.G, alpha, tol=1e-12) - bundle.H))
    report.add(_deviation("number_phase_covariance_c", dev_c, TOL_LOOSE))
    report.add(_deviation("number_phase_covariance_h", dev_h, TOL_LOOSE))

    # --- classic gap equation and states ------------------------------------
    sol = solve_gap(mt, kernel, init=init, damping=damping, tol=tol_solve, max_iter=max_iter)
    cert = float(np.max(np.abs(gap_residual(mt, kernel, sol.delta))))
    report.add(
        CheckResult(
            "gap_solution_classic", 0.0, cert, cert, tol,
            bool(cert <= tol),
            reason="trivial solution" if sol.trivial else "",
        )
    )
    angles = sol.theta

    psi_b = bcs_state(mt, angles)
    psi_b_exp = bcs_state_exponential(mt, angles, tol=1e-12)
    report.add(_deviation("bcs_product_vs_exponential", float(np.linalg.norm(psi_b - psi_b_exp)), TOL_IDENTITY))
    psi_f = fermi_vacuum(mt)

    w_dense = np.array([expectation(psi_b, bundle.B[i], psi_b).real for i in range(m)])
    dev = max(
        (abs(expectation(psi_b, bundle.B[i], psi_b) - 0.5 * angles.sin2t[i]) for i in range(m)),
        default=0.0,
    )
    report.add(_deviation("pair_expectation_half_sin2theta", dev, TOL_EXPECT))

    dev = max(
        (
            abs(ssb_witness(mt, psi_b, i, g=bundle.G, b=bundle.B[i])
                + 2.0 * expectation(psi_b, bundle.B[i], psi_b))
            for i in range(m)
        ),
        default=0.0,
    )
    report.add(_deviation("ssb_witness_commutator", dev, TOL_EXPECT))

    gb = build_GB(mt, angles)
    dev = 0.0
    for i in range(m):
        dev = max(dev, op_norm_inf(commutator(bundle.h[i], 1j * gb) - 2.0 * angles.theta[i] * bundle.v[i]))
        dev = max(
            dev,
            op_norm_inf(
                commutator(bundle.v[i], 1j * gb)
                + 2.0 * angles.theta[i] * (bundle.h[i] - identity_op(mt.dim))
            ),
        )
    report.add(_deviation("pairing_commutators", dev, TOL_TIGHT))

    dev = 0.0
    for i in range(m):
        xi_i, d_i = mt.xi[i], angles.delta[i]
        lhs = conjugate_series(xi_i * bundle.h[i] - d_i * bundle.v[i], gb, 1.0, tol=1e-12)
        rhs = (
            (xi_i * angles.cos2t[i] + d_i * angles.sin2t[i]) * bundle.h[i]
            + (xi_i * angles.sin2t[i] - d_i * angles.cos2t[i]) * bundle.v[i]
            + (2.0 * xi_i * angles.sin_t[i] ** 2 - d_i * angles.sin2t[i]) * identity_op(mt.dim)
        )
        dev = max(dev, op_norm_inf(lhs - rhs))
    report.add(_deviation("meanfield_conjugation", dev, TOL_LOOSE))

    quasi = quasi_ops(mt, angles, verify=False)
    gammas = quasi.all_ops()
    dev = 0.0
    ident = identity_op(mt.dim)
    for a in range(len(gammas)):
        for b in range(len(gammas)):
            mixed = anticommutator(gammas[a], adjoint(gammas[b]))
            if a == b:
                mixed = mixed - ident
            dev = max(dev, op_norm_inf(mixed))
            dev = max(dev, op_norm_inf(anticommutator(gammas[a], gammas[b])))
    report.add(_deviation("gamma_car", dev, TOL_TIGHT))

    dev = max((float(np.linalg.norm(g @ psi_b)) for g in gammas), default=0.0)
    report.add(_deviation("gamma_annihilates_bcs", dev, TOL_IDENTITY))

    if dense_ok:
        dev = 0.0
        for i in range(m):
            for closed, j in ((quasi.up[i], mt.orb_up(i)), (quasi.dn[i], mt.orb_dn(i))):
                rotated = conjugate_series(ladder_matrix(j, m), gb, -1.0, tol=1e-11)
                dev = max(dev, op_norm_inf(closed - rotated))
        report.add(_deviation("gamma_closed_form_vs_conjugation", dev, TOL_LOOSE))
    else:
        report.add(_skip("gamma_closed_form_vs_conjugation", f"M={m} above dense cap"))

    # --- mean-field splitting -----------------------------------------------
    hm = build_HM(mt, sol.delta, w_dense)
    fluct = None
    for kp in range(m):
        bdag = adjoint(bundle.B[kp] - w_dense[kp] * ident)
        for k in range(m):
            u = kernel.u[k, kp]
            if u == 0.0:
                continue
            term = u * (bdag @ (bundle.B[k] - w_dense[k] * ident))
            fluct = term if fluct is None else fluct + term
    if fluct is None:
        fluct = 0.0 * ident
    report.add(_deviation("hm_splitting", op_norm_inf(bundle.H - hm - fluct), TOL_IDENTITY))

    hprime = build_Hprime(mt, kernel, angles)
    report.add(_deviation("hprime_definition", op_norm_inf(hprime - (bundle.H - hm)), TOL_IDENTITY))

    # --- energies ------------------------------------------------------------
    ebcs = ebcs_formula(mt, angles, w_dense)
    report.add(_compare("ebcs_formula_vs_dense_hm", ebcs, expectation(psi_b, hm, psi_b).real, TOL_IDENTITY))
    if sol.converged:
        report.add(_compare("ebcs_formula_vs_dense_h", ebcs, expectation(psi_b, bundle.H, psi_b).real, TOL_IDENTITY))
    else:
        report.add(_skip("ebcs_formula_vs_dense_h", "needs a gap-equation solution"))
    report.add(
        _compare("fermi_vacuum_energy", free_fermi_energy(mt), expectation(psi_f, bundle.H, psi_f).real, TOL_IDENTITY)
    )

    if dense_ok:
        report.add(_deviation("hm_spectrum_multiset", hm_spectrum_check(hm, mt, sol.delta, ebcs), TOL_LOOSE))
        ground = float(np.linalg.eigvalsh(hm.toarray())[0])
        report.add(_compare("hm_ground_equals_ebcs", ebcs, ground, TOL_LOOSE))
    else:
        report.add(_skip("hm_spectrum_multiset", f"M={m} above dense cap"))
        report.add(_skip("hm_ground_equals_ebcs", f"M={m} above dense cap"))

    if sol.converged:
        dense_diff = (expectation(psi_b, bundle.H, psi_b) - expectation(psi_f, bundle.H, psi_f)).real
        report.add(_compare("condensation_energy", condensation_energy(mt, sol.delta), dense_diff, TOL_IDENTITY))
    else:
        report.add(_skip("condensation_energy", "needs a gap-equation solution"))

    # --- corrected state ------------------------------------------------------
    corr = correction_state(mt, kernel, angles, quasi, psi_b)
    psi = normalized_psi(psi_b, corr)
    report.add(_deviation("bcs_phi_orthogonal", abs(np.vdot(psi_b, corr.phi)), TOL_TIGHT))

    dk, dsum = dk_weights(mt, kernel, sol.delta)
    report.add(_compare("phi_overlap_equals_half_dsum", corr.overlap, 0.5 * dsum, TOL_IDENTITY))

    report.add(_deviation("hprime_on_bcs_vanishes", abs(expectation(psi_b, hprime, psi_b)), TOL_IDENTITY))
    expansion = hprime_bcs_expansion(mt, kernel, angles, quasi, psi_b)
    report.add(_deviation("hprime_bcs_expansion", float(np.linalg.norm(hprime @ psi_b - expansion)), TOL_IDENTITY))
    report.add(
        _compare(
            "phi_hprime_bcs_formula",
            phi_hprime_coupling_formula(mt, kernel, angles),
            np.vdot(corr.phi, hprime @ psi_b).real,
            TOL_LOOSE,
        )
    )
    report.add(
        _compare(
            "psi_hm_expectation_formula",
            lemma_hm_expectation_formula(mt, kernel, angles, corr.overlap, ebcs),
            expectation(psi, hm, psi).real,
            TOL_LOOSE,
        )
    )

    denergy = delta_E_formula(mt, kernel, angles, corr.overlap)
    dense_diff = (expectation(psi, bundle.H, psi) - expectation(psi_b, bundle.H, psi_b)).real
    report.add(_compare("delta_e_formula_vs_dense", denergy, dense_diff, TOL_LOOSE))

    offdiag = np.any(kernel.u != 0.0)
    if sol.converged and not sol.trivial and offdiag:
        e_psi = expectation(psi, bundle.H, psi).real
        e_bcs = expectation(psi_b, bundle.H, psi_b).real
        e_f = expectation(psi_f, bundle.H, psi_f).real
        ordered = (e_psi < e_bcs - STRICT_MARGIN) and (e_bcs < e_f - STRICT_MARGIN)
        report.add(CheckResult("energy_ordering_chain", e_psi, e_f, e_f - e_psi, STRICT_MARGIN, bool(ordered)))
    else:
        report.add(_skip("energy_ordering_chain", "needs a nontrivial gap and nonzero coupling"))

    shrink = correction_factor(dk, dsum)
    dev = max(
        (
            abs(expectation(psi, bundle.B[i], psi) - 0.5 * angles.sin2t[i] * shrink[i])
            for i in range(m)
        ),
        default=0.0,
    )
    report.add(_deviation("corrected_pair_expectation", dev, TOL_IDENTITY))

    # --- corrected gap equation ------------------------------------------------
    new_sol = solve_new_gap(mt, kernel, init=init, damping=damping, tol=tol_solve, max_iter=max_iter)
    cert = float(np.max(np.abs(new_gap_residual(mt, kernel, new_sol.delta))))
    report.add(
        CheckResult(
            "gap_solution_new", 0.0, cert, cert, tol,
            bool(cert <= tol),
            reason="trivial solution" if new_sol.trivial else "",
        )
    )

    plain = solve_new_gap(
        mt, kernel, init=init, damping=damping, tol=tol_solve, max_iter=max_iter,
        include_correction=False,
    )
    report.add(
        _deviation(
            "new_gap_reduction",
            float(np.max(np.abs(plain.delta.delta - sol.delta.delta))),
            10.0 * tol,
        )
    )

    angles_t = new_sol.theta
    psi_bt = bcs_state(mt, angles_t)
    quasi_t = quasi_ops(mt, angles_t, verify=False)

    gammas_t = quasi_t.all_ops()
    dev = 0.0
    for a in range(len(gammas_t)):
        for b in range(len(gammas_t)):
            mixed = anticommutator(gammas_t[a], adjoint(gammas_t[b]))
            if a == b:
                mixed = mixed - ident
            dev = max(dev, op_norm_inf(mixed))
            dev = max(dev, op_norm_inf(anticommutator(gammas_t[a], gammas_t[b])))
    report.add(_deviation("gamma_tilde_car", dev, TOL_TIGHT))
    dev = max((float(np.linalg.norm(g @ psi_bt)) for g in gammas_t), default=0.0)
    report.add(_deviation("gamma_tilde_annihilates_bcs", dev, TOL_IDENTITY))

    corr_t = correction_state(mt, kernel, angles_t, quasi_t, psi_bt)
    psi_t = normalized_psi(psi_bt, corr_t)
    report.add(_compare("new_overlap_identity", corr_t.overlap, 0.5 * new_sol.dsum, TOL_IDENTITY))

    if new_sol.converged:
        dev = corollary_new_selfconsistency(mt, kernel, new_sol, psi_t, b_ops=bundle.B)
        report.add(_deviation("corollary_new_selfconsistency", dev, max(TOL_LOOSE, 10.0 * tol)))
    else:
        report.add(_skip("corollary_new_selfconsistency", "corrected equation did not converge"))

    w_t = np.array([expectation(psi_t, bundle.B[i], psi_t).real for i in range(m)])
    hm_t = build_HM(mt, new_sol.delta, w_t)
    ebcs_t = ebcs_formula(mt, angles_t, w_t)
    if dense_ok:
        report.add(_deviation("new_spectrum_multiset", hm_spectrum_check(hm_t, mt, new_sol.delta, ebcs_t), TOL_LOOSE))
    else:
        report.add(_skip("new_spectrum_multiset", f"M={m} above dense cap"))

    dev = max(
        (
            abs(ssb_witness(mt, psi_t, i, g=bundle.G, b=bundle.B[i])
                + 2.0 * expectation(psi_t, bundle.B[i], psi_t))
            for i in range(m)
        ),
        default=0.0,
    )
    report.add(_deviation("ssb_witness_corrected_state", dev, TOL_EXPECT))

    # --- ordering invariance -----------------------------------------------------
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    mt_p, kernel_p = permuted_instance(mt, kernel, perm)
    base = _physical_scalars(mt, kernel, init, damping, tol_solve, max_iter)
    moved = _physical_scalars(mt_p, kernel_p, init, damping, tol_solve, max_iter)
    dev = max(
        abs(base["ebcs"] - moved["ebcs"]),
        abs(base["condensation"] - moved["condensation"]),
        abs(base["delta_e"] - moved["delta_e"]),
        float(np.max(np.abs(base["delta_sorted"] - moved["delta_sorted"]))),
        float(np.max(np.abs(base["new_delta_sorted"] - moved["new_delta_sorted"]))),
    )
    report.add(_deviation("ordering_invariance", dev, TOL_IDENTITY))

    report.metadata = {
        "n_modes": m,
        "modes": [list(n) for n in mt.nvecs],
        "xi": mt.xi.tolist(),
        "kernel": kernel.u.tolist(),
        "solver": {"init": init, "damping": damping, "tol": tol, "max_iter": max_iter},
        "seed": seed,
        "classic": {
            "delta": sol.delta.delta.tolist(),
            "residual_inf": sol.residual_inf,
            "iterations": sol.iterations,
            "converged": sol.converged,
            "trivial": sol.trivial,
        },
        "new": {
            "delta": new_sol.delta.delta.tolist(),
            "residual_inf": new_sol.residual_inf,
            "iterations": new_sol.iterations,
            "converged": new_sol.converged,
            "trivial": new_sol.trivial,
            "dk": new_sol.dk.tolist(),
            "dsum": new_sol.dsum,
            "max_factor_dev": new_sol.max_factor_dev,
        },
    }
    return report
