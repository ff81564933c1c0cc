import numpy as np
import pytest

from conftest import curved, flat_bump
from core.errors import DimensionMismatch, FoldedMesh, InvalidParameter, OutOfRange, OutsideDomain
from discretize.assembly import assemble, full_mass, symmetry_residual
from discretize.interpolation import SolutionField, interpolate
from discretize.mesh import Resolution, build_mesh
from geometry.curves import BoundaryCurve
from geometry.domain import SIDE_INTERVAL, DomainSpec


@pytest.fixture(scope='module')
def small_rectangle_mesh():
    return build_mesh(DomainSpec.rectangle(5.0), 40, 16)


class TestBuildMesh:
    def test_uniform_jacobians_on_rectangle(self, small_rectangle_mesh):
        det = small_rectangle_mesh.determinants
        assert np.allclose(det, (5 / 40) * (1 / 16), rtol=1e-12)

    def test_bump_stays_close_to_uniform(self):
        mesh = build_mesh(flat_bump(5.0, 0.05), 40, 16)
        uniform = (5 / 40) * (1 / 16)
        assert mesh.determinants.min() >= 0.8 * uniform

    def test_boundary_nodes_on_curves(self):
        spec = curved(6.0, 0.15, eta=0.05)
        mesh = build_mesh(spec, 48, 16)
        X = mesh.nodes[:, 0].reshape(mesh.shape)
        Y = mesh.nodes[:, 1].reshape(mesh.shape)
        assert np.max(np.abs(X[0, :] - spec.left(Y[0, :]))) <= 1e-10
        assert np.max(np.abs(X[-1, :] - spec.right(Y[-1, :]))) <= 1e-10
        assert np.max(np.abs(Y[:, 0] - spec.bottom(X[:, 0]))) <= 1e-10
        assert np.max(np.abs(Y[:, -1] - spec.top(X[:, -1]))) <= 1e-10

    def test_below_resolution_floor(self):
        with pytest.raises(InvalidParameter):
            build_mesh(DomainSpec.rectangle(5.0), 39, 16)
        with pytest.raises(InvalidParameter):
            build_mesh(DomainSpec.rectangle(5.0), 40, 15)

    def test_crossed_sides_fold(self):
        spec = DomainSpec.from_curves(5.0, 0.0, 0.0, right=BoundaryCurve.constant(-1.0, SIDE_INTERVAL))
        with pytest.raises(FoldedMesh):
            build_mesh(spec, 40, 16)

    def test_resolution_policy(self):
        resolution = Resolution(20, 40)
        assert resolution.nx_for(10.0) == 200
        assert Resolution(4, 16).nx_for(10.0) == 80
        assert resolution.h == pytest.approx(0.05)

    def test_dump(self, small_rectangle_mesh, tmp_path):
        path = small_rectangle_mesh.dump(tmp_path / 'mesh.txt')
        lines = path.read_text().splitlines()
        assert lines[0] == 'nodes 697 cells 640 nx 40 ny 16'
        assert len(lines) == 1 + 697 + 640
        assert lines[1].split()[-1] == '1'


class TestAssembly:
    def test_symmetric(self):
        ops = assemble(build_mesh(curved(6.0, 0.15, eta=0.05), 48, 16))
        assert symmetry_residual(ops.stiffness) <= 1e-12
        assert symmetry_residual(ops.mass) <= 1e-12

    def test_mass_sums_to_area(self, small_rectangle_mesh):
        assert full_mass(small_rectangle_mesh).sum() == pytest.approx(5.0, rel=1e-12)

    def test_rayleigh_quotient_of_ground_state(self, small_rectangle_mesh):
        mesh = small_rectangle_mesh
        ops = assemble(mesh)
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        u = ops.restrict(np.sin(np.pi * x / 5) * np.sin(np.pi * y))
        quotient = (u @ (ops.stiffness @ u)) / (u @ (ops.mass @ u))
        exact = np.pi ** 2 * (1 + 1 / 25)
        h = mesh.h
        assert exact <= quotient <= exact * (1 + 5 * h ** 2)

    def test_extend_and_restrict(self, small_rectangle_mesh):
        ops = assemble(small_rectangle_mesh)
        full = ops.extend(np.ones(ops.n))
        assert full[small_rectangle_mesh.boundary_mask].sum() == 0
        assert np.array_equal(ops.restrict(full), np.ones(ops.n))
        with pytest.raises(DimensionMismatch):
            ops.restrict(np.ones(ops.n + 1))


class TestInterpolation:
    def test_cubic_polynomial_is_reproduced(self, small_rectangle_mesh):
        mesh = small_rectangle_mesh
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        values = x ** 2 * y
        assert interpolate(values, mesh, 1.0, 0.5) == pytest.approx(0.5, abs=1e-10)
        assert interpolate(values, mesh, 1.0, 0.5, (1, 0)) == pytest.approx(1.0, abs=1e-8)
        assert interpolate(values, mesh, 1.0, 0.5, (0, 1)) == pytest.approx(1.0, abs=1e-8)
        assert interpolate(values, mesh, 1.0, 0.5, (2, 0)) == pytest.approx(1.0, abs=1e-7)
        assert interpolate(values, mesh, 1.0, 0.5, (2, 1)) == pytest.approx(2.0, abs=1e-5)

    def test_nodal_values_are_exact(self, small_rectangle_mesh):
        mesh = small_rectangle_mesh
        rng = np.random.default_rng(3)
        values = rng.standard_normal(mesh.n_nodes)
        field = SolutionField(mesh, values)
        k = mesh.node_index(13, 7)
        assert field(*mesh.nodes[k]) == pytest.approx(values[k], abs=1e-12)

    def test_second_derivative_of_sine(self, small_rectangle_mesh):
        mesh = small_rectangle_mesh
        values = np.sin(np.pi * mesh.nodes[:, 1])
        assert interpolate(values, mesh, 2.5, 0.5, (0, 2)) == pytest.approx(-np.pi ** 2, rel=2e-2)

    def test_curved_map_chain_rule(self):
        mesh = build_mesh(curved(6.0, 0.15, eta=0.05), 96, 32)
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        field = SolutionField(mesh, x * y)
        d = field.derivatives(3.0, 0.4)
        assert d['x'] == pytest.approx(0.4, abs=1e-6)
        assert d['y'] == pytest.approx(3.0, abs=1e-6)
        assert d['xy'] == pytest.approx(1.0, abs=1e-4)

    def test_outside_domain(self, small_rectangle_mesh):
        with pytest.raises(OutsideDomain):
            interpolate(np.zeros(small_rectangle_mesh.n_nodes), small_rectangle_mesh, 6.0, 0.5)

    def test_derivative_order_limit(self, small_rectangle_mesh):
        with pytest.raises(OutOfRange):
            interpolate(np.zeros(small_rectangle_mesh.n_nodes), small_rectangle_mesh, 1.0, 0.5, (3, 0))

    def test_wrong_length(self, small_rectangle_mesh):
        with pytest.raises(DimensionMismatch):
            SolutionField(small_rectangle_mesh, np.zeros(10))
