"""SU(2) propagation core: exact steps, adaptive composition, windows."""

import math

import numpy as np
import pytest

from oracles import fine_step_propagator

from phasejump.errors import (
    BasisMismatchError,
    ConvergenceError,
    InvalidArgumentError,
    WindowTooSmallError,
)
from phasejump.models import (
    FieldSample,
    ParabolicParams,
    constant_detuning_pulse,
    parabolic,
    phase_jump,
)
from phasejump.propagation import (
    ADIABATIC,
    DIABATIC,
    SimConfig,
    StateVector,
    Unitary2,
    auto_window,
    evolve_state,
    propagate,
    su2_exp,
    transition_probability,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


class TestUnitary2:
    def test_identity(self):
        u = Unitary2.identity()
        assert np.allclose(u.matrix, np.eye(2))
        assert u.basis == DIABATIC

    def test_compose_requires_same_basis(self):
        a = Unitary2.identity(DIABATIC)
        b = Unitary2.identity(ADIABATIC)
        with pytest.raises(BasisMismatchError):
            a @ b

    def test_dagger_and_det(self):
        u = su2_exp(FieldSample(alpha=0.7, v=1.1, phi=0.3), 0.9)
        assert np.allclose(u.dagger().matrix, u.matrix.conj().T)
        assert abs(u.det() - 1.0) < 1e-14

    def test_from_matrix_shape_check(self):
        with pytest.raises(InvalidArgumentError):
            Unitary2.from_matrix(np.eye(3))

    def test_rejects_unknown_basis(self):
        with pytest.raises(InvalidArgumentError):
            Unitary2.identity("weird")


class TestSu2Exp:
    def test_zero_hamiltonian_gives_identity(self):
        u = su2_exp(FieldSample(alpha=0.0, v=0.0), 1.0)
        assert np.allclose(u.matrix, np.eye(2))

    def test_diagonal_case(self):
        t = 0.37
        u = su2_exp(FieldSample(alpha=1.0, v=0.0), t)
        expected = np.diag([np.exp(-1j * t), np.exp(1j * t)])
        assert np.allclose(u.matrix, expected, atol=1e-15)

    def test_resonant_half_flip_is_minus_i_sigma_x(self):
        # pulse area 2 * (pi/4) * 2 = pi, so full population transfer
        u = su2_exp(FieldSample(alpha=0.0, v=math.pi / 4), 2.0)
        expected = -1j * np.array([[0, 1], [1, 0]])
        assert np.allclose(u.matrix, expected, atol=1e-15)
        assert abs(u.entries[1]) ** 2 == pytest.approx(1.0, abs=1e-14)

    def test_unitary_to_1e12(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            s = FieldSample(alpha=rng.normal() * 10, v=abs(rng.normal()) * 10,
                            phi=rng.uniform(0, 2 * math.pi))
            u = su2_exp(s, rng.normal())
            assert u.unitarity_defect() < 1e-12

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            su2_exp(FieldSample(alpha=1.0, v=0.0), math.nan)
        with pytest.raises(InvalidArgumentError):
            FieldSample(alpha=math.inf, v=0.0)


class TestPropagate:
    def test_zero_model_identity(self):
        m = parabolic(ParabolicParams(b=0.0, c=0.0))
        u = propagate(m, -4.0, 7.0)
        # alpha = t^2 is nonzero, so use a genuinely zero Hamiltonian instead
        m0 = constant_detuning_pulse(delta=0.0, amplitude=0.0, half_width=1.0)
        u0 = propagate(m0, -4.0, 7.0)
        assert np.allclose(u0.matrix, np.eye(2), atol=1e-14)
        assert u.unitarity_defect() < 1e-12

    def test_area_theorem_on_resonance(self):
        # alpha == 0, constant coupling: P = sin^2(area / 2)
        rng = np.random.default_rng(3)
        for _ in range(10):
            v = rng.uniform(0.3, 2.0)
            area = rng.uniform(0.0, 4 * math.pi)
            t_half = area / (4.0 * v)
            m = constant_detuning_pulse(delta=0.0, amplitude=v, half_width=t_half)
            u = propagate(m, -t_half, t_half)
            assert abs(u.entries[1]) ** 2 == pytest.approx(
                math.sin(area / 2.0) ** 2, abs=1e-9)

    def test_matches_fine_step_oracle(self):
        # frozen contract: adaptive result within 1e-8 of the dt=1e-5 oracle
        m = parabolic(ParabolicParams(b=1.0, c=10.0))
        t_half = auto_window(m)
        ref = fine_step_propagator(m, -t_half, t_half, dt=1e-5)
        u = propagate(m, -t_half, t_half, SimConfig(window_half_width=t_half))
        assert np.max(np.abs(u.matrix - ref)) < 1e-8

    def test_midpoint_scheme_available(self):
        # second-order fallback agrees with the default scheme at its own
        # (coarser) global accuracy
        m = parabolic(ParabolicParams(b=1.0, c=1.0))
        u4 = propagate(m, -1.0, 1.0)
        u2 = propagate(m, -1.0, 1.0, scheme="midpoint")
        assert np.max(np.abs(u4.matrix - u2.matrix)) < 1e-6

    def test_unknown_scheme_rejected(self):
        m = parabolic(ParabolicParams(b=1.0, c=1.0))
        with pytest.raises(InvalidArgumentError):
            propagate(m, 0.0, 1.0, scheme="rk4")

    def test_composition_over_random_splits(self):
        rng = np.random.default_rng(11)
        cfg = SimConfig(window_half_width=50.0)
        for _ in range(25):
            b = rng.uniform(0.0, 3.0)
            c = rng.uniform(-5.0, 10.0)
            m = parabolic(ParabolicParams(b=b, c=c))
            if rng.random() < 0.5:
                m = phase_jump(m)
            t0, t1, t2 = np.sort(rng.uniform(-6.0, 6.0, size=3))
            whole = propagate(m, t0, t2, cfg)
            split = propagate(m, t1, t2, cfg) @ propagate(m, t0, t1, cfg)
            assert np.max(np.abs(whole.matrix - split.matrix)) < 1e-9

    def test_unitarity_after_full_evolution(self):
        m = phase_jump(parabolic(ParabolicParams(b=2.0, c=5.0)))
        u = propagate(m, -12.0, 12.0, SimConfig(window_half_width=12.0))
        assert u.unitarity_defect() < 1e-10
        assert abs(abs(u.det()) - 1.0) < 1e-10

    def test_tolerance_halving_stability(self):
        m = parabolic(ParabolicParams(b=1.0, c=10.0))
        t_half = auto_window(m)
        for tol in (1e-8, 1e-10):
            p1 = transition_probability(m, SimConfig(window_half_width=t_half,
                                                     local_error_tol=tol))
            p2 = transition_probability(m, SimConfig(window_half_width=t_half,
                                                     local_error_tol=tol / 2))
            assert abs(p1 - p2) <= tol

    def test_sigma_z_conjugation_identity(self):
        # propagator of the flipped model equals sz U sz for t >= 0
        rng = np.random.default_rng(5)
        cfg = SimConfig(window_half_width=50.0)
        for _ in range(8):
            p = ParabolicParams(b=rng.uniform(0.1, 3.0), c=rng.uniform(-4.0, 8.0))
            ref = parabolic(p)
            var = phase_jump(ref)
            for t in (1.0, 2.5):
                u_ref = propagate(ref, 0.0, t, cfg)
                u_var = propagate(var, 0.0, t, cfg)
                conj = SZ @ u_ref.matrix @ SZ
                assert np.max(np.abs(u_var.matrix - conj)) < 1e-9

    def test_time_reversal_roundtrip(self):
        m = phase_jump(parabolic(ParabolicParams(b=1.4, c=3.0)))
        cfg = SimConfig(window_half_width=50.0)
        fwd = propagate(m, -2.0, 4.0, cfg)
        bwd = propagate(m, 4.0, -2.0, cfg)
        assert np.max(np.abs((fwd @ bwd).matrix - np.eye(2))) < 1e-9

    def test_step_underflow_raises_convergence_error(self):
        m = parabolic(ParabolicParams(b=1.0, c=0.0))
        cfg = SimConfig(window_half_width=10.0, local_error_tol=1e-16,
                        min_step=0.05, max_step=0.5)
        with pytest.raises(ConvergenceError) as err:
            propagate(m, -5.0, 5.0, cfg)
        assert err.value.achieved_error is not None
        assert err.value.achieved_error > 0.0


class TestEvolveState:
    def test_identity(self):
        psi = StateVector(0.0, 1.0)
        out = evolve_state(Unitary2.identity(), psi)
        assert (out.c_excited, out.c_ground) == (0.0, 1.0)

    def test_flip(self):
        u = su2_exp(FieldSample(alpha=0.0, v=math.pi / 4), 2.0)  # -i sigma_x
        out = evolve_state(u, StateVector(0.0, 1.0))
        assert out.c_excited == pytest.approx(-1j, abs=1e-15)
        assert abs(out.c_ground) < 1e-15

    def test_matches_transition_probability(self):
        m = parabolic(ParabolicParams(b=2.0, c=0.0))
        t_half = auto_window(m)
        cfg = SimConfig(window_half_width=t_half)
        u = propagate(m, -t_half, t_half, cfg)
        out = evolve_state(u, StateVector(0.0, 1.0))
        assert abs(out.c_excited) ** 2 == pytest.approx(
            transition_probability(m, cfg), abs=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)

    def test_basis_mismatch(self):
        u = Unitary2.identity(ADIABATIC)
        with pytest.raises(BasisMismatchError):
            evolve_state(u, StateVector(1.0, 0.0, basis=DIABATIC))


class TestWindow:
    def test_auto_window_parabolic(self):
        m = parabolic(ParabolicParams(b=1.0, c=10.0))
        t = auto_window(m)
        assert t == pytest.approx(math.sqrt(110.0), rel=1e-4)

    def test_auto_window_respects_coupling_scale(self):
        m = parabolic(ParabolicParams(b=4.0, c=0.0))
        assert auto_window(m) == pytest.approx(math.sqrt(400.0), rel=1e-4)

    def test_auto_window_not_fooled_by_deep_well(self):
        # |alpha(1)| = 199 >= 100 but the crossings are far outside t = 1
        m = parabolic(ParabolicParams(b=1.0, c=200.0))
        assert auto_window(m) == pytest.approx(math.sqrt(300.0), rel=1e-3)

    def test_pulsed_coupling_allows_any_window_beyond_support(self):
        m = constant_detuning_pulse(delta=0.5, amplitude=1.0, half_width=2.0)
        assert auto_window(m) == pytest.approx(2.0, rel=1e-3)

    def test_window_too_small_error_reports_requirement(self):
        m = parabolic(ParabolicParams(b=1.0, c=10.0))
        with pytest.raises(WindowTooSmallError) as err:
            transition_probability(m, SimConfig(window_half_width=3.0))
        assert err.value.required_half_width == pytest.approx(math.sqrt(110.0), rel=1e-3)

    def test_no_window_for_resonant_constant_coupling(self):
        m = parabolic(ParabolicParams(b=0.0, c=0.0))
        # b=0 means V == 0 everywhere, so any window is fine and P = 0
        assert transition_probability(m) == 0.0


class TestTransitionProbability:
    def test_no_coupling_gives_zero(self):
        for c in (-3.0, 0.0, 5.0):
            m = parabolic(ParabolicParams(b=0.0, c=c))
            assert transition_probability(m) == 0.0

    def test_in_unit_interval(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            m = parabolic(ParabolicParams(b=rng.uniform(0, 3), c=rng.uniform(-3, 6)))
            p = transition_probability(m)
            assert 0.0 <= p <= 1.0

    def test_rect_phase_jump_exact_product_formula(self):
        # the rectangular jump pulse is exactly solvable: two rotations about
        # (+-amp, 0, delta) give P = 4 (amp*delta/Om^2)^2 sin^4(Om*hw).
        # Sudden edges keep this far below the adiabatic strong-coupling value.
        for delta, amp, hw in [(0.4, 8.0, 3.0), (1.0, 1.0, 2.0), (0.7, 2.5, 1.3)]:
            m = phase_jump(constant_detuning_pulse(delta=delta, amplitude=amp,
                                                   half_width=hw))
            p = transition_probability(m, SimConfig(window_half_width=hw + 0.5))
            om = math.hypot(delta, amp)
            exact = 4 * (amp * delta / om ** 2) ** 2 * math.sin(om * hw) ** 4
            assert p == pytest.approx(exact, abs=1e-10)

    def test_phase_jump_resonant_returns_to_ground(self):
        m = phase_jump(constant_detuning_pulse(delta=0.0, amplitude=1.3, half_width=2.0))
        p = transition_probability(m, SimConfig(window_half_width=2.25))
        assert p < 1e-9


class TestSimConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(window_half_width=-1.0),
        dict(local_error_tol=0.0),
        dict(min_step=0.0),
        dict(min_step=1.0, max_step=0.5),
        dict(window_scale_factor=1.0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            SimConfig(**kwargs)
