import math

import numpy as np
import pytest

from bcslab.errors import ValidationError
from bcslab.gapsolve import (
    AngleTable,
    GapTable,
    correction_factor,
    dk_weights,
    gap_residual,
    new_gap_residual,
    solve_gap,
    solve_new_gap,
    theta_from_delta,
)
from bcslab.model import Kernel, explicit_modes, separable_kernel


def test_theta_three_four_five(two_mode):
    mt, _ = two_mode
    angles = theta_from_delta(mt, GapTable(delta=np.array([1.2, 1.2])))
    assert np.allclose(angles.sin2t, 0.6, atol=1e-15)
    assert np.allclose(angles.cos2t, 0.8, atol=1e-15)
    assert np.allclose(angles.energy, 2.0, atol=1e-15)
    # cached half-angle values are consistent
    assert np.allclose(2.0 * angles.sin_t * angles.cos_t, angles.sin2t, atol=1e-15)
    assert np.allclose(angles.cos_t**2 - angles.sin_t**2, angles.cos2t, atol=1e-15)


def test_theta_gapless_conventions():
    mt = explicit_modes([(1, 0, 0), (-1, 0, 0)], xi_override=[-1.0, -1.0])
    angles = theta_from_delta(mt, GapTable(delta=np.zeros(2)))
    assert np.all(angles.theta == 0.5 * math.pi)
    mt = explicit_modes([(1, 0, 0), (-1, 0, 0)], xi_override=[1.0, 1.0])
    angles = theta_from_delta(mt, GapTable(delta=np.zeros(2)))
    assert np.all(angles.theta == 0.0)
    mt = explicit_modes([(1, 0, 0), (-1, 0, 0)], xi_override=[0.0, 0.0])
    angles = theta_from_delta(mt, GapTable(delta=np.zeros(2)))
    assert np.all(angles.theta == 0.5 * math.pi)
    assert np.all(angles.cos2t == -1.0)


def test_theta_ratio_invariant_random():
    rng = np.random.default_rng(31)
    mt = explicit_modes([(0, 0, 0), (1, 0, 0), (-1, 0, 0)], mu=rng.uniform(0.2, 1.0))
    for _ in range(10):
        d = rng.uniform(0.0, 3.0, size=2)
        gap = GapTable(delta=np.array([d[0], d[1], d[1]]))
        angles = theta_from_delta(mt, gap)
        energy = np.hypot(mt.xi, gap.delta)
        assert np.allclose(angles.sin2t * energy, gap.delta, atol=1e-14)
        assert np.allclose(angles.cos2t * energy, mt.xi, atol=1e-14)
        assert np.all((0.0 <= angles.theta) & (angles.theta <= 0.5 * math.pi))


def test_angle_table_from_theta_validation(two_mode):
    mt, _ = two_mode
    with pytest.raises(ValidationError):
        AngleTable.from_theta(mt, [0.1, 0.2])
    with pytest.raises(ValidationError):
        AngleTable.from_theta(mt, [-0.1, -0.1])
    with pytest.raises(ValidationError):
        AngleTable.from_theta(mt, [2.0, 2.0])
    ok = AngleTable.from_theta(mt, [0.3, 0.3])
    assert ok.energy is None


def test_gap_table_validation(two_mode):
    mt, _ = two_mode
    with pytest.raises(ValidationError):
        GapTable(delta=np.array([-1.0, -1.0])).validate(mt)
    with pytest.raises(ValidationError):
        GapTable(delta=np.array([1.0, 2.0])).validate(mt)
    with pytest.raises(ValidationError):
        GapTable(delta=np.array([1.0])).validate(mt)


def test_residual_zero_gap(two_mode):
    mt, kernel = two_mode
    assert np.all(gap_residual(mt, kernel, GapTable(delta=np.zeros(2))) == 0.0)


def test_residual_at_solution(two_mode):
    mt, kernel = two_mode
    r = gap_residual(mt, kernel, GapTable(delta=np.array([1.2, 1.2])))
    assert np.max(np.abs(r)) <= 1e-15


def test_residual_off_solution_arithmetic(two_mode):
    mt, kernel = two_mode
    r = gap_residual(mt, kernel, GapTable(delta=np.ones(2)))
    expected = 1.0 - 2.0 / math.sqrt(2.56 + 1.0)
    assert np.allclose(r, expected, atol=1e-15)
    assert expected == pytest.approx(-0.06, abs=1e-4)


def test_solve_pair_instance_closed_form(two_mode):
    mt, kernel = two_mode
    sol = solve_gap(mt, kernel, init=1.0, damping=1.0, tol=1e-13)
    assert sol.converged and not sol.trivial
    assert np.max(np.abs(sol.delta.delta - 1.2)) <= 1e-12
    assert sol.iterations < 200
    # independent residual certificate
    assert np.max(np.abs(gap_residual(mt, kernel, sol.delta))) <= 1e-13


def test_solve_subcritical_reports_trivial(two_mode):
    mt, _ = two_mode
    weak = Kernel(u=np.array([[0.0, -2.0], [-2.0, 0.0]]))  # g/2 = 1 < |xi|
    sol = solve_gap(mt, weak)
    assert sol.converged and sol.trivial
    assert np.max(sol.delta.delta) < 1e-8


def test_solve_zero_kernel_immediate(two_mode):
    mt, _ = two_mode
    sol = solve_gap(mt, Kernel(u=np.zeros((2, 2))))
    assert sol.converged and sol.trivial
    assert sol.iterations == 0
    assert np.all(sol.delta.delta == 0.0)


def test_solver_option_validation(two_mode):
    mt, kernel = two_mode
    with pytest.raises(ValidationError):
        solve_gap(mt, kernel, init=0.0)
    with pytest.raises(ValidationError):
        solve_gap(mt, kernel, damping=0.0)
    with pytest.raises(ValidationError):
        solve_gap(mt, kernel, damping=1.5)
    with pytest.raises(ValidationError):
        solve_gap(mt, kernel, tol=-1.0)


def test_solution_symmetric_exactly(three_mode):
    mt, kernel = three_mode
    sol = solve_gap(mt, kernel)
    assert np.all(sol.delta.delta == sol.delta.delta[mt.pair])
    nsol = solve_new_gap(mt, kernel)
    assert np.all(nsol.delta.delta == nsol.delta.delta[mt.pair])


def test_decoupled_modes_stay_gapless():
    # shell excludes the origin: its kernel row is zero, so Delta_0 stays 0
    mt = explicit_modes([(0, 0, 0), (1, 0, 0), (-1, 0, 0)], mu=0.5)
    kernel = separable_kernel(mt, 4.0, shell=lambda kn: kn > 0.5)
    sol = solve_gap(mt, kernel)
    assert sol.converged and not sol.trivial
    assert sol.delta.delta[0] == 0.0
    assert np.all(sol.delta.delta[1:] > 0.1)


def test_unconverged_returns_best_iterate(two_mode):
    mt, kernel = two_mode
    sol = solve_gap(mt, kernel, max_iter=3, damping=0.5)
    assert not sol.converged
    assert sol.residual_inf > 1e-10
    assert np.all(sol.delta.delta > 0)


def test_dk_weights_pair_instance(two_mode):
    mt, kernel = two_mode
    dk, dsum = dk_weights(mt, kernel, GapTable(delta=np.array([1.2, 1.2])))
    assert np.allclose(dk, 0.0324, atol=1e-15)
    assert dsum == pytest.approx(0.0648, abs=1e-15)
    factor = correction_factor(dk, dsum)
    assert np.allclose(factor, 1.0 - 0.1296 / 2.0648, atol=1e-12)
    assert np.all(dk >= 0)


def test_dk_weights_zero_kernel(two_mode):
    mt, _ = two_mode
    dk, dsum = dk_weights(mt, Kernel(u=np.zeros((2, 2))), GapTable(delta=np.array([1.2, 1.2])))
    assert np.all(dk == 0) and dsum == 0
    assert np.all(correction_factor(dk, dsum) == 1.0)


def test_solve_new_gap_pair_instance(two_mode):
    mt, kernel = two_mode
    nsol = solve_new_gap(mt, kernel, damping=1.0, tol=1e-12)
    assert nsol.converged and not nsol.trivial
    assert np.all(nsol.delta.delta > 0)
    assert np.all(nsol.delta.delta < 1.2)  # shrunken coupling
    assert np.max(np.abs(new_gap_residual(mt, kernel, nsol.delta))) <= 1e-10
    assert nsol.dk is not None and nsol.dsum == pytest.approx(np.sum(nsol.dk))
    assert 0.0 < nsol.max_factor_dev < 1.0
    assert nsol.nonpositive_factor == ()


def test_solve_new_gap_zero_kernel(two_mode):
    mt, _ = two_mode
    nsol = solve_new_gap(mt, Kernel(u=np.zeros((2, 2))))
    assert nsol.trivial and np.all(nsol.delta.delta == 0)


def test_new_reduces_to_classic_without_correction(two_mode):
    mt, kernel = two_mode
    tol = 1e-12
    classic = solve_gap(mt, kernel, damping=1.0, tol=tol)
    plain = solve_new_gap(mt, kernel, damping=1.0, tol=tol, include_correction=False)
    assert np.max(np.abs(plain.delta.delta - classic.delta.delta)) <= 10 * tol


def test_scaling_consistency(two_mode):
    # U -> cU, xi -> c xi scales the solution Delta -> c Delta
    mt, kernel = two_mode
    c = 2.5
    tol = 1e-12
    base = solve_gap(mt, kernel, tol=tol)
    mt_s = explicit_modes([(1, 0, 0), (-1, 0, 0)], xi_override=[1.6 * c, 1.6 * c])
    sol_s = solve_gap(mt_s, Kernel(u=c * kernel.u), tol=tol)
    assert np.max(np.abs(sol_s.delta.delta - c * base.delta.delta)) <= 10 * tol * c


def test_new_gap_scaling_consistency(three_mode):
    # the correction factor is dimensionless, so the same scaling law holds
    mt, kernel = three_mode
    c = 3.0
    tol = 1e-12
    base = solve_new_gap(mt, kernel, tol=tol)
    mt_s = explicit_modes([(0, 0, 0), (1, 0, 0), (-1, 0, 0)], mu=0.5 * c, hbar=math.sqrt(c))
    assert np.allclose(mt_s.xi, c * mt.xi, atol=1e-14)
    sol_s = solve_new_gap(mt_s, Kernel(u=c * kernel.u), tol=tol)
    assert np.max(np.abs(sol_s.delta.delta - c * base.delta.delta)) <= 100 * tol * c


def test_degenerate_mode_is_flagged_not_fatal():
    # xi = 0 at the origin with a shell that decouples it: Delta_0 = 0, E_0 = 0
    mt = explicit_modes([(0, 0, 0), (1, 0, 0), (-1, 0, 0)], mu=0.0)
    kernel = separable_kernel(mt, 4.0, shell=lambda kn: kn > 0.5)
    sol = solve_gap(mt, kernel)
    assert sol.converged
    assert sol.degenerate_modes == (0,)
    dk, dsum = dk_weights(mt, kernel, sol.delta)
    assert np.all(np.isfinite(dk)) and np.isfinite(dsum)
