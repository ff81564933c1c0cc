import numpy as np
import pytest

from adiabatic.duhamel import duhamel_data, transverse_eigenvalue
from adiabatic.modes import decompose
from certify.calibration import MIN_CONSTANT, SAFETY, Measurement, calibrate, calibration_specs
from certify.hadamard import HadamardResult, hadamard_check, main_term
from certify.intervals import compute_intervals, interval_points
from certify.lambdas import compute_lambdas
from certify.pipeline import certify_solution, certify_spec
from certify.theorem import (
    CertificateReport, bracket_checks, duhamel_checks, hypothesis_checks, rectangle_discretization_error, regime_scale,
)
from conftest import flat_bump
from core.constants import CalibratedConstants
from core.errors import InvalidParameter, NotFlat
from discretize.mesh import Resolution
from eigensolve.solver import pair, solve_domain
from geometry.domain import Check, DomainSpec, domain_from_mapping, validate_domain
from geometry.frame import identity_frame


class TestScales:
    def test_regime_scale(self):
        constants = CalibratedConstants()
        spec = DomainSpec.rectangle(10.0, eta=0.05, delta=0.1)
        expected = 0.05 * np.exp(-constants.c_cal * 10.0) + 0.1 / 100.0
        assert regime_scale(spec, constants) == pytest.approx(expected)
        assert regime_scale(DomainSpec.rectangle(10.0), constants) == 0.0

    def test_discretization_error_shrinks(self):
        coarse = rectangle_discretization_error(10.0, 80, 16)
        fine = rectangle_discretization_error(10.0, 160, 32)
        assert coarse > fine > 0
        assert coarse / fine == pytest.approx(4.0, rel=5e-2)

    def test_bracket_on_rectangle(self, rectangle_spec, rectangle_second):
        bracket, checks = bracket_checks(rectangle_spec, rectangle_second, CalibratedConstants())
        lo, hi, mu, passed = bracket
        assert passed
        assert lo <= hi
        assert mu == rectangle_second.mu
        assert [check.name for check in checks] == ['bracket_lower', 'bracket_upper']


class TestCertificateReport:
    def test_record_failure(self):
        report = CertificateReport(spec={'N': 10.0})
        report.checks.append(Check('diam', 1e-4, 1e-3))
        assert report.passed
        report.record_failure('nodal', {'error': 'DisconnectedNodalSet', 'message': 'two lines'})
        assert not report.passed
        assert report.failures == ['nodal_completed']
        assert report.errors[0]['step'] == 'nodal'
        assert report.diam_check.passed

    def test_to_dict(self):
        report = CertificateReport(spec={'N': 10.0}, interval_I=(4.9, 5.1))
        payload = report.to_dict()
        assert payload['interval_I'] == [4.9, 5.1]
        assert payload['interval_tilde'] is None
        assert payload['passed'] is True
        assert 'width' in payload['strips']
        assert report.summary_row()['N'] == 10.0

    def test_missing_check(self):
        with pytest.raises(KeyError):
            CertificateReport(spec={}).get('slope')

    def test_solver_failure_is_recorded(self):
        report = certify_spec(DomainSpec.rectangle(5.0), Resolution(8, 16), tol=1e-3)
        assert not report.passed
        assert report.errors[0]['step'] == 'solve'
        assert report.errors[0]['error'] == 'InvalidParameter'
        assert report.mu is None

    def test_disconnected_nodal_set_is_recorded(self, rectangle_solutions):
        report = certify_solution(rectangle_solutions[2], CalibratedConstants())
        assert report.errors[0]['step'] == 'nodal'
        assert report.has('bracket_lower')
        assert 'nodal_completed' in report.failures


class TestHadamard:
    def test_main_term_closed_forms(self):
        eta, N = 0.04, 10.0
        spec = flat_bump(N, eta)
        assert main_term(spec, 1) == pytest.approx(-16 * eta / (3 * np.pi ** 2 * N), rel=1e-10)
        assert main_term(spec, 2) == pytest.approx(0.0, abs=1e-14)

    def test_needs_flat_domain(self, curved_spec, curved_second):
        with pytest.raises(NotFlat):
            hadamard_check(curved_spec, curved_second, 1)

    def test_mode_index(self, flat_spec, flat_second):
        with pytest.raises(InvalidParameter):
            hadamard_check(flat_spec, flat_second, 0)

    def test_symmetric_mode_has_no_relative_error(self, flat_spec, flat_second):
        result = hadamard_check(flat_spec, flat_second, 2)
        assert result.main == pytest.approx(0.0, abs=1e-14)
        assert np.isnan(result.relative)
        assert set(result.to_dict()) == {'k', 'direct', 'main', 'err', 'relative'}

    @pytest.mark.parametrize('main,expected_nan', [(-5.4e-19, True), (0.0, True), (-2e-3, False)])
    def test_round_off_main_term(self, main, expected_nan):
        result = HadamardResult(k=2, direct=5.3e-17, main=main, err=abs(5.3e-17 - main))
        assert np.isnan(result.relative) == expected_nan

    @pytest.mark.slow
    def test_relative_error_shrinks_with_eta(self):
        relative = []
        for eta in (0.04, 0.01):
            spec = flat_bump(10.0, eta)
            result = hadamard_check(spec, pair(solve_domain(spec, Resolution(40, 80)), 2), 1)
            relative.append(result.relative)
        assert relative[0] <= 0.25
        assert relative[1] < relative[0]


class TestCertificate:
    @pytest.mark.slow
    def test_flat_tracking(self):
        eta = 0.01
        report = certify_spec(flat_bump(10.0, eta), Resolution(20, 40))
        assert report.errors == []
        assert report.tau <= 3e-4 * eta
        assert report.Lambda1 >= 0.3
        assert report.Lambda2 >= 1.2
        assert report.curve['max_abs_g1'] <= 3e-2 * eta
        assert report.curve['max_abs_g2'] <= 3e-2 * eta
        assert report.slope_check.passed
        assert all(check.passed for check in report.angle_check)
        assert report.bracket[3]

    @pytest.mark.slow
    def test_curved_domain_reports_without_raising(self, curved_spec):
        report = certify_spec(curved_spec)
        assert report.mu is not None
        assert report.has('diam') or report.errors
        payload = report.to_dict()
        assert payload['passed'] == report.passed


class TestCalibration:
    def test_specs_cover_both_families(self):
        specs = calibration_specs()
        assert len(specs) == 12
        assert sum(spec.is_flat for spec in specs) == 6
        assert all(validate_domain(spec).passed for spec in specs)

    def test_calibrate(self):
        measurements = [
            Measurement(N=6.0, eta=0.01, delta=0.0, ratios={'C_w': 2.0, 'C_g': 0.01, 'C_tau': None}, slope_floor=6.0),
            Measurement(N=9.0, eta=0.05, delta=0.0, ratios={'C_w': 1.0}, slope_floor=4.5),
        ]
        base = CalibratedConstants()
        constants = calibrate(measurements, base)
        assert constants.C_w == pytest.approx(SAFETY * 2.0)
        assert constants.C_g == MIN_CONSTANT
        assert constants.Lambda_slope == pytest.approx(4.5 / SAFETY)
        assert constants.C_tau == base.C_tau
        assert constants.C_floor == base.C_floor
        assert constants.eta_max == 0.05

    def test_measurement_to_dict(self):
        measurement = Measurement(N=6.0, eta=0.0, delta=0.05, errors=['NoRoot'])
        assert measurement.to_dict()['errors'] == ['NoRoot']


class TestLambdas:
    def test_center_bound_takes_the_whole_cross_section(self, flat_spec, flat_second):
        profiles, residual = decompose(flat_second, kmax=8)
        intervals = compute_intervals(profiles, residual, flat_spec)
        data = compute_lambdas(profiles, residual, identity_frame(flat_spec), flat_spec, intervals)
        assert data.Lambda1 > 0
        xs = interval_points(intervals.x0 - intervals.tau, intervals.x0 + intervals.tau, [intervals.x0])
        geometry = np.pi * data.sup_w1 / float(np.min(flat_spec.height(xs)))
        assert data.center_g1_bound == pytest.approx((geometry + residual.sup_at('y', xs)) / data.Lambda1)
        assert data.center_g1_bound >= (geometry + residual.sup_at('y', xs, 'complement')) / data.Lambda1


class TestHypotheses:
    def test_compliant_domain(self, flat_spec):
        failures, checks = hypothesis_checks(flat_spec, CalibratedConstants())
        assert failures == []
        assert [check.name for check in checks] == ['hypotheses', 'eta_calibrated']
        assert all(check.passed for check in checks)

    def test_domain_inequalities_are_flagged(self):
        spec = domain_from_mapping({
            'N': '10', 'ETA': '0.05', 'DELTA': '0',
            'LEFT_FAMILY': 'trig_series', 'LEFT_COEFFICIENTS': '0, pi, 0, -eta/pi',
        })
        failures, checks = hypothesis_checks(spec, CalibratedConstants())
        assert failures == ['left_d2']
        assert not checks[0].passed

    def test_eta_beyond_calibration(self):
        failures, checks = hypothesis_checks(flat_bump(10.0, 0.5), CalibratedConstants(eta_max=0.05))
        assert failures == []
        assert [check.passed for check in checks] == [True, False]

    def test_out_of_regime_certificate_is_flagged(self):
        report = certify_spec(flat_bump(6.0, 0.5), Resolution(8, 16), CalibratedConstants())
        assert not report.passed
        assert 'eta_calibrated' in report.failures
        assert report.to_dict()['hypotheses'] == []


class TestDuhamelVerdicts:
    def test_budgets(self, flat_second):
        profiles, _ = decompose(flat_second, kmax=4)
        data = duhamel_data(flat_second, profiles[0], transverse='discrete')
        assert data.transverse == pytest.approx(transverse_eigenvalue(1, 1.0, flat_second.mesh.ny))
        constants = CalibratedConstants()
        h = flat_second.mesh.h
        exact = duhamel_checks(data, profiles[0], 0.0, 0.0, h, constants)
        assert [check.name for check in exact] == ['duhamel_reconstruction_k1', 'ode_residual_k1']
        assert all(check.passed for check in exact)
        off = duhamel_checks(data, profiles[0], 1.0, 10.0, h, constants)
        assert not any(check.passed for check in off)
