import numpy as np
import pytest

from conftest import curved, flat_bump
from core.errors import ConfigError, DegenerateFoot, InvalidParameter, NonEvaluableCurve, OutOfRange, OutsideDomain
from geometry.curves import BoundaryCurve, CurveKind, SampledCurve
from geometry.domain import (
    DomainSpec, corners, domain_boxes, domain_from_mapping, eigenvalue_bracket, eval_boundary,
    height_and_beta, load_domain, validate_domain,
)
from geometry.frame import boundary_foot, identity_frame, rotated_frame


class TestBoundaryCurve:
    def test_trig_series_derivatives(self):
        eta = 0.05
        curve = BoundaryCurve(CurveKind.TRIG_SERIES, (0.0, np.pi, 0.0, -eta), nominal=0.0, interval=(-0.5, 1.5))
        y = 0.3
        assert curve(y) == pytest.approx(-eta * np.sin(np.pi * y))
        assert curve(y, 1) == pytest.approx(-eta * np.pi * np.cos(np.pi * y))
        assert curve(y, 2) == pytest.approx(eta * np.pi ** 2 * np.sin(np.pi * y))
        assert curve(y, 5) == pytest.approx(-eta * np.pi ** 5 * np.cos(np.pi * y))

    def test_polynomial_derivatives(self):
        eta = 0.05
        curve = BoundaryCurve(CurveKind.POLYNOMIAL, (0.0, -eta, eta), nominal=0.0, interval=(-0.5, 1.5))
        assert curve(0.5) == pytest.approx(-eta / 4)
        assert curve(0.5, 1) == pytest.approx(0.0)
        assert curve(0.5, 2) == pytest.approx(2 * eta)
        assert curve(0.5, 3) == 0.0

    def test_amplitude_matches_dense_sampling(self):
        curve = BoundaryCurve(CurveKind.TRIG_SERIES, (1.0, 1.0, -1e-3, 0.0), nominal=1.0, interval=(-0.5, 10.5))
        assert curve.amplitude == pytest.approx(1e-3, rel=1e-6)

    def test_translated_and_offset(self):
        curve = BoundaryCurve(CurveKind.POLYNOMIAL, (0.0, 1.0), nominal=0.0, interval=(0.0, 4.0))
        moved = curve.translated(1.0)
        assert moved.interval == (-1.0, 3.0)
        assert moved(0.0) == pytest.approx(curve(1.0))
        raised = curve.offset(2.0)
        assert raised(1.0) == pytest.approx(3.0)
        assert raised.nominal == 2.0

    @pytest.mark.parametrize('kind,coefficients', [
        (CurveKind.CONSTANT, (1.0, 2.0)),
        (CurveKind.TRIG_SERIES, (0.0, 1.0, 0.5)),
        (CurveKind.POLYNOMIAL, (float('nan'),)),
        (CurveKind.POLYNOMIAL, ()),
    ])
    def test_bad_coefficients(self, kind, coefficients):
        with pytest.raises(NonEvaluableCurve):
            BoundaryCurve(kind, coefficients, nominal=0.0, interval=(0.0, 1.0))

    def test_order_out_of_range(self):
        with pytest.raises(OutOfRange):
            BoundaryCurve.constant(0.0, (0.0, 1.0))(0.5, 6)

    def test_sampled_curve_follows_samples(self):
        t = np.linspace(0.0, 2.0, 81)
        curve = SampledCurve(t, np.sin(t), nominal=0.0)
        assert curve(1.0) == pytest.approx(np.sin(1.0), abs=1e-10)
        assert curve(1.0, 1) == pytest.approx(np.cos(1.0), abs=1e-7)

    def test_sampled_curve_needs_increasing_abscissae(self):
        with pytest.raises(NonEvaluableCurve):
            SampledCurve([0.0, 1.0, 0.5, 2.0, 3.0, 4.0], np.zeros(6), nominal=0.0)


class TestEvalBoundary:
    def test_rectangle_top(self):
        assert eval_boundary(DomainSpec.rectangle(10.0), 'T', 3.7) == 1.0

    def test_curved_bottom(self):
        spec = curved(10.0, 0.1)
        assert eval_boundary(spec, 'B', 0.0) == pytest.approx(1e-4)
        assert eval_boundary(spec, 'B', 0.0, order=1) == pytest.approx(0.0, abs=1e-18)

    def test_outside_interval(self):
        with pytest.raises(OutOfRange):
            eval_boundary(DomainSpec.rectangle(10.0), 'L', 2.0)

    def test_order_must_be_integer(self):
        with pytest.raises(OutOfRange):
            eval_boundary(DomainSpec.rectangle(10.0), 'L', 0.5, order=1.5)


class TestValidateDomain:
    def test_rectangle_passes_with_zero_measurements(self):
        report = validate_domain(DomainSpec.rectangle(10.0))
        assert report.passed
        assert report.get('left_d1').measured == 0.0
        assert report.get('bottom_range').measured == 0.0

    def test_scaled_bump_passes(self):
        report = validate_domain(flat_bump(10.0, 0.05))
        assert report.passed
        assert report.get('left_d2').measured == pytest.approx(0.05, rel=1e-4)

    def test_bump_over_pi_fails_second_derivative(self):
        spec = domain_from_mapping({
            'N': '10', 'ETA': '0.05', 'DELTA': '0',
            'LEFT_FAMILY': 'trig_series', 'LEFT_COEFFICIENTS': '0, pi, 0, -eta/pi',
        })
        report = validate_domain(spec)
        assert report.failures == ['left_d2']
        assert report.get('left_d2').measured == pytest.approx(np.pi * 0.05, rel=1e-4)

    def test_unscaled_bump_fails_first_derivative(self):
        spec = domain_from_mapping({
            'N': '10', 'ETA': '0.05', 'DELTA': '0',
            'LEFT_FAMILY': 'trig_series', 'LEFT_COEFFICIENTS': '0, pi, 0, -eta',
        })
        report = validate_domain(spec)
        assert not report.passed
        assert 'left_d1' in report.failures
        assert report.get('left_d1').measured == pytest.approx(np.pi * 0.05, rel=1e-4)

    def test_outer_box_covers_the_whole_side(self):
        # the left side leaves the outer box only above y = 1 - s, next to its top corner
        spec = domain_from_mapping({
            'N': '6', 'ETA': '0.05', 'DELTA': '0.15',
            'LEFT_FAMILY': 'polynomial', 'LEFT_COEFFICIENTS': '-0.05 - 0.05*scale, -0.05',
            'BOTTOM_FAMILY': 'trig_series', 'BOTTOM_COEFFICIENTS': '0, 1, -scale, 0',
            'TOP_FAMILY': 'trig_series', 'TOP_COEFFICIENTS': '1, 1, scale, 0',
        })
        report = validate_domain(spec)
        assert 'inside_outer_box' in report.failures
        assert report.get('inside_outer_box').measured == pytest.approx(0.1 * spec.scale, rel=2e-2)

    def test_curved_passes(self):
        report = validate_domain(curved(6.0, 0.15))
        assert report.passed
        assert report.get('height_min').measured == pytest.approx(1 - 2 * 0.15 / 216)

    @pytest.mark.parametrize('N,eta,delta,parameter', [
        (10.0, 0.0, 0.25, 'delta'),
        (4.0, 0.0, 0.0, 'N'),
        (10.0, -0.1, 0.0, 'eta'),
    ])
    def test_standing_assumptions(self, N, eta, delta, parameter):
        with pytest.raises(InvalidParameter) as exc:
            validate_domain(DomainSpec.rectangle(N, eta, delta))
        assert exc.value.details['parameter'] == parameter

    def test_report_to_dict(self):
        payload = validate_domain(DomainSpec.rectangle(6.0)).to_dict()
        assert payload['passed'] is True
        assert payload['failures'] == []
        assert {'name', 'measured', 'bound', 'relation', 'tol', 'passed'} <= set(payload['checks'][0])


class TestBoxesAndBracket:
    def test_bracket_example(self):
        spec = DomainSpec.rectangle(10.0, eta=0.05, delta=0.1)
        lo, hi = eigenvalue_bracket(spec)
        assert lo == pytest.approx(10.2451, abs=1e-4)
        assert hi == pytest.approx(10.2683, abs=1e-4)

    def test_boxes(self):
        inner, outer = domain_boxes(DomainSpec.rectangle(10.0, eta=0.05, delta=0.1))
        assert inner == pytest.approx((0.0, 10.0, 1e-4, 1 - 1e-4))
        assert outer == pytest.approx((-0.1, 10.1, -1e-4, 1 + 1e-4))

    def test_rectangle_corners(self):
        points = corners(DomainSpec.rectangle(10.0))
        assert points['BL'] == pytest.approx((0.0, 0.0))
        assert points['TR'] == pytest.approx((10.0, 1.0))


class TestHeightAndBeta:
    def test_rectangle(self):
        h, beta = height_and_beta(DomainSpec.rectangle(10.0), 3.0, 0.25)
        assert h == 1.0
        assert beta == pytest.approx(np.pi / 4)

    def test_curved_height(self):
        spec = curved(10.0, 0.1)
        h, beta = height_and_beta(spec, 0.0, 0.5)
        assert h == pytest.approx(1 - 2e-4)
        assert beta == pytest.approx(np.pi / 2, abs=1e-12)

    @pytest.mark.parametrize('x,y', [(-1.0, 0.5), (5.0, 1.5)])
    def test_outside(self, x, y):
        with pytest.raises(OutsideDomain):
            height_and_beta(DomainSpec.rectangle(10.0), x, y)


class TestConfigFiles:
    def test_load_shipped_config(self):
        spec = load_domain('configs/curved_delta.cfg')
        assert spec.N == 6.0
        assert spec.scale == pytest.approx(0.15 / 216)
        assert spec.bottom(0.0) == pytest.approx(spec.scale)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_domain(tmp_path / 'absent.cfg')

    def test_missing_n(self):
        with pytest.raises(ConfigError) as exc:
            domain_from_mapping({'ETA': '0'})
        assert exc.value.key == 'N'

    def test_unknown_family(self):
        with pytest.raises(ConfigError) as exc:
            domain_from_mapping({'N': '10', 'ETA': '0', 'DELTA': '0',
                                 'LEFT_FAMILY': 'spline', 'LEFT_COEFFICIENTS': '0'})
        assert exc.value.key == 'LEFT_FAMILY'

    def test_bad_expression(self):
        with pytest.raises(ConfigError) as exc:
            domain_from_mapping({'N': '10', 'ETA': 'eta + 1', 'DELTA': '0'})
        assert exc.value.key == 'ETA'


class TestFrames:
    def test_identity_frame(self):
        frame = identity_frame(DomainSpec.rectangle(10.0))
        assert frame.to_physical(1.0, 0.5) == pytest.approx((1.0, 0.5))

    def test_flat_foot_gives_identity(self):
        spec = DomainSpec.rectangle(10.0)
        foot = boundary_foot(spec, (5.0, 0.5))
        assert foot == pytest.approx((5.0, 0.0))
        frame = rotated_frame(spec, (5.0, 0.5), foot)
        assert frame.is_identity
        assert frame.angle == 0.0

    def test_curved_frame_anchors_bottom(self):
        spec = curved(6.0, 0.15)
        point = (2.0, 0.4)
        foot = boundary_foot(spec, point)
        frame = rotated_frame(spec, point, foot)
        assert abs(frame.angle) == pytest.approx(abs(np.arctan(spec.bottom(foot[0], 1))), abs=1e-10)
        assert abs(frame.angle) <= 2 * spec.scale
        assert frame.rhoB(frame.anchor) == pytest.approx(0.0, abs=1e-10)
        assert frame.rhoB(frame.anchor, 1) == pytest.approx(0.0, abs=1e-10)

    def test_top_foot_reflects(self):
        spec = curved(6.0, 0.15)
        point = (1.0, 0.9)
        frame = rotated_frame(spec, point, boundary_foot(spec, point, 'T'))
        assert frame.reflected
        assert frame.rhoB(frame.anchor) == pytest.approx(0.0, abs=1e-10)

    def test_round_trip(self):
        spec = curved(6.0, 0.15)
        point = (3.0, 0.5)
        frame = rotated_frame(spec, point, boundary_foot(spec, point))
        rng = np.random.default_rng(7)
        x, y = rng.uniform(0.0, 6.0, 100), rng.uniform(0.0, 1.0, 100)
        xb, yb = frame.to_physical(*frame.from_physical(x, y))
        assert np.max(np.hypot(xb - x, yb - y)) <= 1e-12

    def test_degenerate_foot(self):
        spec = curved(6.0, 0.15)
        foot = (2.0, float(spec.bottom(2.0)))
        with pytest.raises(DegenerateFoot):
            rotated_frame(spec, foot, foot)
