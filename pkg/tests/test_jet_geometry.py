import math

import numpy as np
import pytest

from helpers import all_close, central_difference, close, random_expr, random_weil
from weilgeom.errors import SingularMetric
from weilgeom.functorial_space import WeilPoint
from weilgeom.jet_geometry import (
    Convention,
    LiftedGeometry,
    MetricSpec,
    TensorValue,
    christoffel,
    classical,
    einstein_tensor,
    inverse_metric,
    jmatmul,
    kretschmann,
    metric_at,
    project_real,
    ricci,
    riemann,
    scalar_curvature,
)
from weilgeom.smooth_expr import SmoothExpr, parse
from weilgeom.weil_algebra import WeilElement

R_SPHERE = 1.7
M_SCHW = 1.5


def sphere(r=R_SPHERE):
    r2 = repr(r * r)
    return MetricSpec.from_strings([[r2, "0"], ["0", f"{r2}*sin(x1)^2"]])


def schwarzschild(m=M_SCHW):
    f = f"(1 - {2 * m!r}/x2)"
    return MetricSpec.from_strings([
        [f"-{f}", "0", "0", "0"],
        ["0", f"1/{f}", "0", "0"],
        ["0", "0", "x2^2", "0"],
        ["0", "0", "0", "x2^2*sin(x3)^2"],
    ])


def flrw(q):
    S2 = f"exp({2 * q!r}*log(x1))"
    return MetricSpec.from_strings([
        ["-1", "0", "0", "0"],
        ["0", S2, "0", "0"],
        ["0", "0", S2, "0"],
        ["0", "0", "0", S2],
    ])


def minkowski():
    return MetricSpec.from_strings([["-1", "0", "0", "0"], ["0", "1", "0", "0"],
                                    ["0", "0", "1", "0"], ["0", "0", "0", "1"]])


def random_metric(rng, n):
    """Smooth, diagonally dominant (hence Riemannian) metric over n generators."""
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = 2.0 + random_expr(rng, n, 2).apply("sin") ** 2
        for j in range(i + 1, n):
            rows[i][j] = rows[j][i] = (0.3 / n) * random_expr(rng, n, 2).apply("tanh")
    return MetricSpec(tuple(tuple(r) for r in rows))


def random_probe(rng, n, order):
    return WeilPoint(rng.uniform(-1, 1, size=n), [random_weil(rng, order, real=0.0) for _ in range(n)])


class TestMetricSpec:
    def test_symmetry_enforced(self):
        with pytest.raises(ValueError):
            MetricSpec.from_strings([["1", "x1"], ["x2", "1"]])

    def test_json(self):
        g = sphere()
        assert MetricSpec.from_json(g.to_json()) == g
        assert MetricSpec.from_json({"dim": 2, "components": [["1", "0"], ["0", "1"]]}).dim == 2


class TestMetricAt:
    def test_constant_metrics(self, rng):
        rho = random_probe(rng, 4, 2)
        G = metric_at(minkowski(), rho)
        assert np.array_equal(G.real(), np.diag([-1.0, 1, 1, 1]))
        assert not np.any(G.data[..., 1:])

    def test_sphere_first_order(self):
        r, p = R_SPHERE, 0.8
        rho = WeilPoint([p, 0.1], [WeilElement.epsilon(1), WeilElement.from_real(0, 1)])
        g22 = metric_at(sphere(r), rho)[1, 1].coeffs
        assert close(g22[0], r * r * math.sin(p) ** 2, 1e-14)
        assert close(g22[1], r * r * math.sin(2 * p), 1e-14)


class TestInverse:
    def test_diagonal(self):
        data = np.zeros((2, 2, 3))
        data[0, 0, 0], data[1, 1, 0] = 2.0, 4.0
        inv = inverse_metric(TensorValue(data, ("down", "down")))
        assert np.allclose(inv.real(), np.diag([0.5, 0.25]))

    def test_identity(self):
        data = np.zeros((3, 3, 2))
        data[..., 0] = np.eye(3)
        assert np.array_equal(inverse_metric(TensorValue(data)).data, data)

    def test_multiply_back(self, rng):
        for _ in range(20):
            a = rng.normal(size=(3, 3))
            data = np.zeros((3, 3, 3))
            data[..., 0] = a @ a.T + 3 * np.eye(3)
            pert = rng.normal(size=(3, 3, 2))
            data[..., 1:] = pert + pert.transpose(1, 0, 2)
            inv = inverse_metric(TensorValue(data))
            ident = np.zeros_like(data)
            ident[..., 0] = np.eye(3)
            assert np.allclose(jmatmul(data, inv.data), ident, rtol=0, atol=1e-10)

    def test_singular(self):
        data = np.zeros((2, 2, 2))
        data[0, 0, 0] = 1.0
        with pytest.raises(SingularMetric):
            inverse_metric(TensorValue(data))


class TestChristoffel:
    def test_constant_metric(self, rng):
        assert not np.any(christoffel(minkowski(), random_probe(rng, 4, 2)).data)

    def test_sphere(self, rng):
        for p in rng.uniform(0.2, 2.9, size=5):
            gam = christoffel(sphere(), WeilPoint.evaluation([p, 0.3], 0)).real()
            assert close(gam[0, 1, 1], -math.sin(p) * math.cos(p), 1e-9)
            assert close(gam[1, 0, 1], 1 / math.tan(p), 1e-9)

    def test_flrw(self, rng):
        q = 2 / 3
        for t in rng.uniform(0.1, 2, size=5):
            gam = christoffel(flrw(q), WeilPoint.evaluation([t, 0.1, 0.2, 0.3], 0)).real()
            S, Sdot = t ** q, q * t ** (q - 1)
            assert close(gam[0, 1, 1], S * Sdot, 1e-9)

    def test_torsion_free(self, rng):
        for _ in range(5):
            gam = christoffel(random_metric(rng, 3), random_probe(rng, 3, 2)).data
            assert np.allclose(gam, gam.transpose(0, 2, 1, 3), rtol=0, atol=1e-10)


class TestCurvature:
    def test_flat(self, rng):
        rho = random_probe(rng, 4, 2)
        geo = LiftedGeometry(minkowski(), rho)
        assert np.allclose(geo.riemann.data, 0, atol=1e-12)
        assert np.allclose(geo.scalar.coeffs, 0, atol=1e-12)

    def test_polar_chart_of_the_plane_is_flat(self, rng):
        g = MetricSpec.from_strings([["1", "0"], ["0", "x1^2"]])
        rho = WeilPoint([1.3, 0.2], [WeilElement([0, 1, 0.5]), WeilElement([0, 0, 1])])
        assert np.allclose(riemann(g, rho).data, 0, atol=1e-12)

    def test_sphere_scalar(self, rng):
        for p in rng.uniform(0.2, 2.9, size=5):
            R = scalar_curvature(sphere(), WeilPoint.probe([p, 0.4], 2)).coeffs
            assert close(R[0], 2 / R_SPHERE ** 2, 1e-8)
            assert np.allclose(R[1:], 0, atol=1e-8)

    @pytest.mark.parametrize("q", [2 / 3, 1 / 2, 1.3])
    def test_flrw_scalar_power_law(self, rng, q):
        g = flrw(q)
        for t in rng.uniform(0.05, 3, size=5):
            R = scalar_curvature(g, WeilPoint.evaluation([t, 0.1, 0.2, 0.3], 0)).real
            assert close(R, 6 * (q * (q - 1) + q * q) / t ** 2, 1e-7)

    def test_riemann_antisymmetry_and_bianchi(self, rng):
        for n in (2, 3):
            for _ in range(3):
                R = riemann(random_metric(rng, n), random_probe(rng, n, 2)).data
                assert np.allclose(R, -R.transpose(0, 1, 3, 2, 4), rtol=0, atol=1e-9)
                cyc = R + R.transpose(0, 2, 3, 1, 4) + R.transpose(0, 3, 1, 2, 4)
                assert np.allclose(cyc, 0, rtol=0, atol=1e-8)

    def test_metric_compatibility(self, rng):
        cases = [(sphere(), [0.9, 0.3]), (flrw(2 / 3), [0.7, 0.1, 0.2, 0.3])]
        for g, base in cases:
            n = g.dim
            for _ in range(5):
                X, Y, Z = rng.normal(size=(3, n))
                rho = WeilPoint(base, [WeilElement([0.0, z]) for z in Z])
                G = metric_at(g, rho).data
                gxy = np.einsum("i,j,ija->a", X, Y, G)
                geo = LiftedGeometry(g, WeilPoint.evaluation(base, 0))
                gam = geo.christoffel.real()
                g0 = geo.metric.real()
                nabla_x = np.einsum("i,j,lij->l", Z, X, gam)
                nabla_y = np.einsum("i,j,lij->l", Z, Y, gam)
                expected = nabla_x @ g0 @ Y + X @ g0 @ nabla_y
                assert close(gxy[1], expected, 1e-7)

    def test_nilpotent_sensitivity(self, rng):
        g = random_metric(rng, 2)
        base = rng.uniform(-1, 1, size=2)
        jet = scalar_curvature(g, WeilPoint.probe(base, 1, 1)).coeffs

        def R(p):
            return scalar_curvature(g, WeilPoint.evaluation(p, 0)).real

        assert close(jet[1], central_difference(R, base, 0, h=1e-4), 1e-6)


class TestEinstein:
    def test_vacuum_flat(self, rng):
        assert np.allclose(einstein_tensor(minkowski(), random_probe(rng, 4, 1)).data, 0, atol=1e-12)

    def test_trace_identity(self, rng):
        for n in (2, 3):
            g = random_metric(rng, n)
            geo = LiftedGeometry(g, random_probe(rng, n, 1))
            E = geo.einstein(Convention(-1, 0.0)).real()
            tr = np.einsum("ij,ij->", geo.inverse.real(), E)
            assert close(tr, (1 - n / 2) * geo.scalar.real, 1e-8)

    def test_two_dimensional_einstein_vanishes(self, rng):
        E = einstein_tensor(sphere(), WeilPoint.probe([1.1, 0.2], 2))
        assert np.allclose(E.data, 0, atol=1e-8)

    def test_positive_sign_and_lambda(self):
        geo = LiftedGeometry(sphere(), WeilPoint.evaluation([1.1, 0.2], 0))
        plus = geo.einstein(Convention(1, 0.5)).real()
        expected = geo.ricci.real() + 0.5 * geo.scalar.real * geo.metric.real() + 0.5 * geo.metric.real()
        assert np.allclose(plus, expected, rtol=1e-12)
        with pytest.raises(ValueError):
            Convention(0)


class TestKretschmann:
    def test_flat(self, rng):
        assert np.allclose(kretschmann(minkowski(), random_probe(rng, 4, 1)).coeffs, 0, atol=1e-12)

    def test_sphere(self):
        K = kretschmann(sphere(), WeilPoint.evaluation([0.7, 0.2], 0)).real
        assert close(K, 4 / R_SPHERE ** 4, 1e-7)

    def test_schwarzschild(self, rng):
        g = schwarzschild()
        for r in rng.uniform(4, 20, size=4):
            rho = WeilPoint.probe([0.0, r, 1.1, 0.3], 1, 2)
            geo = LiftedGeometry(g, rho)
            assert np.allclose(geo.ricci.data, 0, atol=1e-8)
            K = geo.kretschmann.coeffs
            assert close(K[0], 48 * M_SCHW ** 2 / r ** 6, 1e-6)
            assert close(K[1], -288 * M_SCHW ** 2 / r ** 7, 1e-6)

    def test_non_negative_for_riemannian(self, rng):
        for _ in range(3):
            assert kretschmann(random_metric(rng, 3), random_probe(rng, 3, 1)).real >= 0


class TestProjection:
    def test_constant(self):
        data = np.zeros((2, 2, 3))
        data[..., 0] = [[1, 2], [2, 5]]
        assert np.array_equal(project_real(TensorValue(data)), [[1, 2], [2, 5]])

    def test_lift_then_project_is_classical(self, rng):
        for n in (2, 3):
            g = random_metric(rng, n)
            rho = random_probe(rng, n, 3)
            lifted = LiftedGeometry(g, rho)
            ref = classical(g, rho)
            assert all_close(lifted.metric.real(), ref.metric.real(), 1e-12)
            assert all_close(lifted.christoffel.real(), ref.christoffel.real(), 1e-12)
            assert all_close(lifted.riemann.real(), ref.riemann.real(), 1e-12)
            assert all_close(ricci(g, rho).real(), ref.ricci.real(), 1e-12)
            assert close(lifted.scalar.real, ref.scalar.real, 1e-12)
            assert close(lifted.kretschmann.real, ref.kretschmann.real, 1e-12)


def test_report_keys(rng):
    report = LiftedGeometry(sphere(), WeilPoint.probe([1.0, 0.0], 1)).report()
    assert list(report) == ["metric", "inverse", "christoffel", "riemann", "ricci",
                            "scalar", "einstein", "kretschmann"]
    assert report["scalar"]["order"] == 1
