import numpy as np
import pytest

import wvamp as w
from conftest import random_hermitian, random_ket
from wvamp import fisher as fi
from wvamp import setups
from wvamp import statevec as sv
from wvamp.errors import (IncompleteBasis, RegimeWarning, StepTooLarge,
                          ZeroSecondMoment)
from wvamp.protocol import (JointObservable, fixed_Ps_weak_value,
                            max_variance_prep, optimal_post_fixed_Ps)

SZ_M = sv.sigma_z("m")
METER = setups.meter_plus()


def generator_family(H, state):
    return lambda g: sv.apply(sv.exp_hermitian(H, g), state)


class TestQfiDerivative:
    def test_constant_family_is_zero(self):
        fam = lambda g: sv.plus_ket("q")
        assert fi.qfi_derivative(fam, 0.4) == pytest.approx(0.0, abs=1e-9)

    def test_generator_families_match_variance(self, rng):
        # 50+ random (state, H) pairs on one to four qubits
        for nq in (1, 2, 3, 4):
            labels = tuple(f"q{i}" for i in range(nq))
            for _ in range(13):
                H = random_hermitian(labels, rng)
                state = random_ket(labels, rng)
                fam = generator_family(H, state)
                oracle = fi.qfi_derivative(fam, 0.0)
                assert oracle == pytest.approx(fi.qfi_generator(state, H),
                                               rel=1e-6, abs=1e-9)

    def test_sigma_z_branch_family_near_analytic(self):
        # exact branch information vs the closed-form linear-response value:
        # the closed form itself carries an O(n^2/|A_w|^2) defect, so 1e-3 is
        # the honest agreement level at these parameters.
        s = setups.optimal_setup(3, "sigma_z", 100j, 1e-3)
        exact = fi.qfi_derivative(fi.branch_family(s), s.g, check_tol=None)
        analytic_phi = fi.analytic_qubit_fisher("sigma_z", "fixed_aw", 3, 1e-3,
                                                aw_magnitude=100.0)
        assert fi.to_phi_units(exact) == pytest.approx(analytic_phi, rel=1e-3)

    def test_step_too_large(self, rng):
        H = sv.Operator(np.diag([0.0, 1.0, 2.0, 40.0]).astype(complex),
                        ("x", "y"), hermitian=True)
        state = sv.ket_from_amplitudes(np.ones(4), ("x", "y"), normalize=True)
        with pytest.raises(StepTooLarge):
            fi.qfi_derivative(generator_family(H, state), 0.0, step=0.3,
                              check_tol=1e-10)

    def test_domain_enforced(self):
        fam = fi.ParamStateFamily(lambda g: sv.plus_ket("q"), domain=(0.0, 1.0))
        with pytest.raises(ValueError):
            fi.qfi_derivative(fam, 0.0, step=1e-4)  # stencil leaves domain

    def test_param_family_smoothness_probe(self):
        fam = fi.ParamStateFamily(lambda g: sv.plus_ket("q"), domain=(-1, 1))
        assert fi.qfi_derivative(fam, 0.5) == pytest.approx(0.0, abs=1e-9)


class TestQfiGenerator:
    def test_eigenstate_zero(self):
        assert fi.qfi_generator(sv.zero_ket("q"), sv.sigma_z("q")) == 0.0

    def test_sigma_z_totals(self):
        obs = JointObservable(sv.sigma_z("a0"), 3)
        joint = sv.tensor(max_variance_prep(obs), METER)
        H = sv.op_tensor(obs.total, SZ_M)
        assert fi.qfi_generator(joint, H) == pytest.approx(36.0, abs=1e-10)
        assert fi.to_phi_units(fi.qfi_generator(joint, H)) == pytest.approx(9.0, abs=1e-10)

    def test_projector_totals(self):
        obs = JointObservable(sv.projector_one("a0"), 3)
        joint = sv.tensor(max_variance_prep(obs), METER)
        H = sv.op_tensor(obs.total, SZ_M)
        assert fi.to_phi_units(fi.qfi_generator(joint, H)) == pytest.approx(4.5, abs=1e-10)


class TestQfiNoPostselection:
    def test_unbiased_meter_form(self, rng):
        obs = JointObservable(sv.sigma_z("a0"), 2)
        prep = max_variance_prep(obs)
        total = fi.qfi_no_postselection(prep, METER, obs.total, SZ_M)
        a2 = sv.inner(prep, sv.apply(obs.total, sv.apply(obs.total, prep))).real
        assert total == pytest.approx(4 * a2, abs=1e-10)

    def test_matches_generator_on_product_state(self, rng):
        for _ in range(10):
            prep = random_ket(("a0", "a1"), rng)
            meter = random_ket(("m",), rng)
            A = random_hermitian(("a0", "a1"), rng)
            F = random_hermitian(("m",), rng)
            lhs = fi.qfi_no_postselection(prep, meter, A, F)
            rhs = fi.qfi_generator(sv.tensor(prep, meter), sv.op_tensor(A, F))
            assert lhs == pytest.approx(rhs, abs=1e-10, rel=1e-10)

    def test_ghz3_values(self):
        obs = JointObservable(sv.sigma_z("a0"), 3)
        prep = max_variance_prep(obs)
        assert fi.qfi_no_postselection(prep, METER, obs.total, SZ_M) == pytest.approx(36.0)
        assert fi.qfi_no_postselection(prep, sv.zero_ket("m"), obs.total,
                                       SZ_M) == pytest.approx(36.0)


class TestQfiOutcome:
    def test_sigma_z_example(self):
        s = setups.optimal_setup(3, "sigma_z", 100j, 1e-3)
        exact, approx = fi.qfi_outcome(s)
        target = 9.0 * (1 - 0.0025)
        assert fi.to_phi_units(exact) == pytest.approx(target, rel=1e-3)
        assert fi.to_phi_units(approx) == pytest.approx(fi.to_phi_units(exact), rel=1e-4)

    def test_projector_example(self):
        s = setups.optimal_setup(3, "projector", 100j, 1e-3)
        exact, _ = fi.qfi_outcome(s)
        assert fi.to_phi_units(exact) == pytest.approx(2.25 * (1 - 0.0025), rel=1e-3)

    def test_fixed_ps_approx_approaches_variance_limit(self):
        obs = JointObservable(sv.sigma_z("a0"), 3)
        prep = max_variance_prep(obs)
        post = optimal_post_fixed_Ps(prep, obs.total, 1e-4, theta=-np.pi / 2)
        s = w.AmplificationSetup(prep=prep, post=post, meter=METER,
                                 A=obs.total, F=SZ_M, g=1e-8)
        _, approx = fi.qfi_outcome(s)
        assert approx == pytest.approx(4 * 9.0, rel=2e-4)


class TestBasisSum:
    def _setup(self, g):
        return setups.optimal_setup(2, "sigma_z", 200j, 2.0 * g)

    def test_saturation_at_small_g(self):
        s = self._setup(1e-4)
        basis = fi.complete_basis(s.post)
        total = fi.qfi_basis_sum(s.prep, s.meter, s.A, s.F, 1e-4, basis)
        assert total == pytest.approx(16.0, rel=1e-3)

    def test_residual_scaling_under_halving(self):
        s = self._setup(1e-4)
        basis = fi.complete_basis(s.post)
        res = []
        for g in (1e-4, 5e-5):
            total = fi.qfi_basis_sum(s.prep, s.meter, s.A, s.F, g, basis)
            res.append(16.0 - total)
        halving = res[1] / res[0]
        # "halves within a factor of [0.3, 3]": quadratic-or-linear decay passes
        assert 0.5 * 0.3 <= halving <= 0.5 * 3.0

    def test_never_exceeds_no_postselection_maximum(self):
        s = self._setup(2e-3)
        basis = fi.complete_basis(s.post)
        total = fi.qfi_basis_sum(s.prep, s.meter, s.A, s.F, 2e-3, basis)
        maximum = fi.qfi_no_postselection(s.prep, s.meter, s.A, s.F)
        assert total <= maximum + 1e-9

    def test_incomplete_basis_rejected(self):
        s = self._setup(1e-4)
        basis = fi.complete_basis(s.post)
        with pytest.raises(IncompleteBasis):
            fi.qfi_basis_sum(s.prep, s.meter, s.A, s.F, 1e-4, basis[:-1])
        skewed = basis[:-1] + [basis[0]]
        with pytest.raises(IncompleteBasis):
            fi.qfi_basis_sum(s.prep, s.meter, s.A, s.F, 1e-4, skewed)

    def test_data_processing_per_outcome(self):
        s = self._setup(1e-4)
        maximum = fi.qfi_no_postselection(s.prep, s.meter, s.A, s.F)
        report = fi.fisher_report(s)
        for _, value in report.per_outcome:
            assert value <= maximum + 1e-9
            assert value >= -1e-9


class TestEfficiency:
    def test_sigma_z_is_one(self):
        for n in (2, 3, 5):
            obs = JointObservable(sv.sigma_z("a0"), n)
            assert fi.efficiency_eta(max_variance_prep(obs), obs.total) == pytest.approx(
                1.0, abs=1e-12)

    def test_projector_is_half(self):
        for n in (2, 3, 5):
            obs = JointObservable(sv.projector_one("a0"), n)
            assert fi.efficiency_eta(max_variance_prep(obs), obs.total) == pytest.approx(
                0.5, abs=1e-12)

    def test_eigenstate_is_zero(self):
        obs = JointObservable(sv.sigma_z("a0"), 2)
        assert fi.efficiency_eta(sv.basis_ket(obs.labels, 0), obs.total) == pytest.approx(
            0.0, abs=1e-12)

    def test_zero_second_moment(self):
        obs = JointObservable(sv.projector_one("a0"), 2)
        with pytest.raises(ZeroSecondMoment):
            fi.efficiency_eta(sv.basis_ket(obs.labels, 0), obs.total)

    def test_eta_bounds_random(self, rng):
        obs = JointObservable(random_hermitian(("a0",), rng), 2)
        for _ in range(25):
            prep = random_ket(obs.labels, rng)
            eta = fi.efficiency_eta(prep, obs.total)
            assert -1e-12 <= eta <= 1.0 + 1e-10


class TestConcentration:
    def test_deficit_tracks_g_aw_squared(self):
        # optimal fixed-P_s postselection, unbiased meter: the fractional loss
        # of eta*I stays within a factor two of |g A_w|^2 Var(F)
        for n, g_aw in ((2, 0.02), (3, 0.05), (3, 0.1)):
            obs = JointObservable(sv.sigma_z("a0"), n)
            prep = max_variance_prep(obs)
            post = optimal_post_fixed_Ps(prep, obs.total, 1e-4, theta=-np.pi / 2)
            aw = abs(fixed_Ps_weak_value(prep, obs.total, 1e-4, theta=-np.pi / 2))
            g = g_aw / aw
            s = w.AmplificationSetup(prep=prep, post=post, meter=METER,
                                     A=obs.total, F=SZ_M, g=g)
            exact, _ = fi.qfi_outcome(s)
            total = fi.qfi_no_postselection(prep, METER, obs.total, SZ_M)
            eta = fi.efficiency_eta(prep, obs.total)
            deficit = 1.0 - exact / (eta * total)
            bound = g_aw ** 2 * sv.variance(METER, SZ_M)
            assert 0.5 <= deficit / bound <= 2.0

    def test_cramer_rao_approaches_inverse_n(self):
        # phi-units Cramer-Rao bound from the postselected branch -> 1/n
        for n in (2, 3):
            s = setups.optimal_setup(n, "sigma_z", 100j, 1e-4)
            exact, _ = fi.qfi_outcome(s)
            cr_phi = fi.to_phi_units(exact) ** -0.5
            assert cr_phi == pytest.approx(1.0 / n, rel=1e-3)


class TestFisherReport:
    def test_report_invariants(self):
        s = setups.optimal_setup(2, "sigma_z", 100j, 1e-3)
        report = fi.fisher_report(s)
        assert report.total == pytest.approx(16.0, abs=1e-10)
        assert report.cramer_rao == pytest.approx(report.total ** -0.5)
        assert 0.0 <= report.eta <= 1.0 + 1e-10
        assert all(v >= -1e-9 for _, v in report.per_outcome)
        # the optimal branch is listed first and carries nearly everything,
        # short only the |g A_w|^2 + n^2/|A_w|^2 deficit (~3e-3 here)
        assert report.per_outcome[0][1] == pytest.approx(16.0, rel=5e-3)
        assert report.per_outcome[0][1] == max(v for _, v in report.per_outcome)
        assert report.units == "per_g"


class TestAnalyticForms:
    def test_sigma_z_fixed_aw(self):
        val = fi.analytic_qubit_fisher("sigma_z", "fixed_aw", 3, 1e-3,
                                       aw_magnitude=100.0)
        assert val == pytest.approx(8.9775, abs=1e-12)

    def test_projector_fixed_aw(self):
        val = fi.analytic_qubit_fisher("projector", "fixed_aw", 3, 1e-3,
                                       aw_magnitude=100.0)
        assert val == pytest.approx(2.25 * (1 - 0.0025), abs=1e-12)

    def test_fixed_ps_carries_extra_factor_n(self):
        base = fi.analytic_qubit_fisher("sigma_z", "fixed_aw", 3, 1e-3,
                                        aw_magnitude=100.0)
        val = fi.analytic_qubit_fisher("sigma_z", "fixed_ps", 3, 1e-3,
                                       aw_magnitude=100.0)
        assert 9.0 - val == pytest.approx(3 * (9.0 - base), rel=1e-12)

    def test_quadratic_scaling_reduction(self):
        # p = n^2 p0 recovers the fixed-A_w form with |A_w| = 1/sqrt(p0)
        n, p0, phi = 3, 1e-6, 1e-4
        via_ps = fi.analytic_qubit_fisher("sigma_z", "fixed_ps", n, phi,
                                          p_s=n * n * p0)
        via_aw = fi.analytic_qubit_fisher("sigma_z", "fixed_aw", n, phi,
                                          aw_magnitude=1.0 / np.sqrt(p0))
        assert via_ps == pytest.approx(via_aw, rel=2e-5)

    def test_regime_warning(self):
        with pytest.warns(RegimeWarning):
            fi.analytic_qubit_fisher("sigma_z", "fixed_aw", 3, 0.01,
                                     aw_magnitude=100.0)

    def test_effective_weak_value_projector(self):
        # (n/2)(1 + sqrt((1-p)/p))
        val = fi.effective_weak_value_magnitude("projector", 3, 0.01)
        assert val == pytest.approx(1.5 * (1 + np.sqrt(99)), rel=1e-12)
