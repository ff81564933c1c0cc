import numpy as np
import pytest

from conftest import curved, flat_bump
from core.errors import InvalidParameter, NonGraphCurve
from discretize.mesh import Resolution
from geometry.domain import DomainSpec
from nodal.curve import NodalCurve
from partition.courant import CourantResult, check_ordering, courant_sharp_check
from partition.cut import cut_along_nodal, fit_nodal_curve
from partition.tree import (
    _to_rectangle, best_fit_rectangle, boundary_points, hausdorff, iterate_partition, rectangle_points,
)


def synthetic_curve(gs_of_y, n: int = 41) -> NodalCurve:
    ys = np.linspace(0.0, 1.0, n)
    gs = gs_of_y(ys)
    return NodalCurve(ys=ys, gs=gs, endpoints=((gs[0], 0.0), (gs[-1], 1.0)), end_slopes=(0.0, 0.0),
                      proj_diameter=float(np.ptp(gs)), max_residual=0.0, cell_height=1 / 40)


class TestFitAndCut:
    def test_fit_is_exact_for_trig_curves(self):
        curve = synthetic_curve(lambda y: 5.0 + 1e-3 * np.sin(np.pi * y))
        side, error = fit_nodal_curve(curve, nominal=5.0)
        assert error <= 1e-8
        assert side(0.3) == pytest.approx(5.0 + 1e-3 * np.sin(0.3 * np.pi), abs=1e-10)
        assert side.interval == (0.0, 1.0)

    def test_non_graph_rejected(self):
        curve = synthetic_curve(lambda y: 5.0 + 0 * y)
        reversed_curve = NodalCurve(ys=curve.ys[::-1], gs=curve.gs, endpoints=curve.endpoints,
                                    end_slopes=curve.end_slopes, proj_diameter=0.0, max_residual=0.0,
                                    cell_height=curve.cell_height)
        with pytest.raises(NonGraphCurve):
            fit_nodal_curve(reversed_curve, nominal=5.0)

    def test_cut_rectangle_in_half(self):
        left, right = cut_along_nodal(DomainSpec.rectangle(10.0), synthetic_curve(lambda y: 5.0 + 0 * y))
        assert left.N == pytest.approx(5.0)
        assert right.N == pytest.approx(5.0)
        assert left.right(0.5) == pytest.approx(5.0)
        assert right.left(0.5) == pytest.approx(0.0, abs=1e-12)
        assert right.right(0.5) == pytest.approx(5.0)
        assert right.left.nominal == pytest.approx(0.0)

    def test_cut_keeps_curved_boundary_in_place(self):
        parent = curved(10.0, 0.1)
        _, right = cut_along_nodal(parent, synthetic_curve(lambda y: 4.0 + 0 * y))
        assert right.N == pytest.approx(6.0)
        assert right.bottom(1.0) == pytest.approx(parent.bottom(5.0))

    def test_cut_outside_domain(self):
        with pytest.raises(NonGraphCurve):
            cut_along_nodal(DomainSpec.rectangle(10.0), synthetic_curve(lambda y: 12.0 + 0 * y))


class TestHausdorff:
    def test_identical_sets(self):
        points = rectangle_points((0.0, 5.0, 0.0, 1.0), 64)
        assert hausdorff(points, points) == 0.0

    def test_shifted_rectangle(self):
        a = rectangle_points((0.0, 5.0, 0.0, 1.0), 256)
        b = rectangle_points((0.1, 5.1, 0.0, 1.0), 256)
        assert hausdorff(a, b) == pytest.approx(0.1, abs=1e-9)

    def test_distance_to_rectangle(self):
        points = np.array([[2.5, 0.5], [6.0, 0.5], [2.5, -0.2], [6.0, 2.0]])
        distances = _to_rectangle(points, (0.0, 5.0, 0.0, 1.0))
        assert distances == pytest.approx([0.5, 1.0, 0.2, np.hypot(1.0, 1.0)])

    def test_rectangle_is_its_own_best_fit(self):
        rect, distance = best_fit_rectangle(DomainSpec.rectangle(6.0))
        assert rect == pytest.approx((0.0, 6.0, 0.0, 1.0), abs=1e-8)
        assert distance <= 1e-9

    def test_bump_distance(self):
        spec = flat_bump(6.0, 0.05)
        _, distance = best_fit_rectangle(spec)
        assert 0.0 < distance <= 0.05 / np.pi ** 2 + 1e-9
        assert boundary_points(spec).shape[1] == 2


class TestPartition:
    def test_depth_limits(self):
        with pytest.raises(InvalidParameter):
            iterate_partition(DomainSpec.rectangle(10.0), depth=5)
        with pytest.raises(InvalidParameter):
            iterate_partition(DomainSpec.rectangle(10.0), depth=-1)

    def test_rectangle_splits_in_half(self):
        tree = iterate_partition(DomainSpec.rectangle(10.0), depth=1, resolution=Resolution(8, 16))
        assert [node.id for node in tree.nodes] == ['root', 'root.L', 'root.R']
        assert tree.node('root').cut_x == pytest.approx(5.0, abs=1e-6)
        for child in tree.children('root'):
            assert child.status == 'ok'
            assert child.spec.N == pytest.approx(5.0, abs=1e-6)
            assert child.hausdorff <= 1e-5
            assert child.mu1 == pytest.approx(np.pi ** 2 * (1 + 1 / 25), rel=2e-2)
        assert tree.cut_contraction()
        assert len(tree.paths()) == 2
        assert [row['id'] for row in tree.rows()] == ['root', 'root.L', 'root.R']

    def test_short_nodes_stop(self):
        tree = iterate_partition(DomainSpec.rectangle(10.0), depth=2, resolution=Resolution(8, 16))
        grandchildren = [node for node in tree.nodes if node.depth == 2]
        assert len(grandchildren) == 4
        assert all(node.status == 'stopped' for node in grandchildren)
        assert all(node.mu1 is None for node in grandchildren)

    @pytest.mark.slow
    def test_worker_pool_keeps_node_order(self):
        serial = iterate_partition(DomainSpec.rectangle(10.0), depth=1, resolution=Resolution(8, 16))
        pooled = iterate_partition(DomainSpec.rectangle(10.0), depth=1, resolution=Resolution(8, 16), workers=2)
        assert [node.id for node in pooled.nodes] == [node.id for node in serial.nodes]
        assert pooled.edges == serial.edges
        assert [node.mu1 for node in pooled.nodes] == pytest.approx([node.mu1 for node in serial.nodes])

    @pytest.mark.slow
    def test_flat_bump_cuts_become_straight(self):
        eta = 0.05
        tree = iterate_partition(flat_bump(20.0, eta), depth=2)
        cut_nodes = [node for node in tree.nodes if node.cut_side_amplitude is not None]
        assert len(cut_nodes) >= 2
        assert all(node.cut_side_amplitude <= 1e-3 * eta for node in cut_nodes)
        assert tree.monotone_paths()
        assert tree.to_dict()['monotone_paths'] is True


class TestCourant:
    @pytest.mark.parametrize('N,k', [(12.0, 3), (10.0, 2), (20.0, 6)])
    def test_ordering_accepted(self, N, k):
        check_ordering(N, k)

    @pytest.mark.parametrize('N,k', [(1.5, 3), (12.0, 1), (12.0, 7)])
    def test_ordering_rejected(self, N, k):
        with pytest.raises(InvalidParameter):
            check_ordering(N, k)

    def test_rectangle_third_pair(self):
        result = courant_sharp_check(DomainSpec.rectangle(12.0), 3, Resolution(10, 16))
        assert result.passed
        assert result.count == 3
        assert result.cut_locations == pytest.approx([4.0, 8.0], abs=1e-2)
        assert result.max_cut_error <= 1e-2

    def test_result_properties(self):
        result = CourantResult(k=3, count=2, mu=1.0, cut_locations=[4.0], expected=[4.0, 8.0])
        assert not result.passed
        assert result.max_cut_error == float('inf')
        assert result.to_dict()['passed'] is False

    @pytest.mark.slow
    def test_flat_bump_is_courant_sharp(self):
        result = courant_sharp_check(flat_bump(12.0, 0.05), 3)
        assert result.count == 3
        assert result.cut_locations == pytest.approx([4.0, 8.0], abs=0.5)
