import math
from fractions import Fraction

import numpy as np
import pytest

from weylred.dint import (
    DirectIntegralSection,
    EmptyRange,
    SingularLevel,
    ambient_integral,
    apply_Tx,
    apply_Tx_adjoint,
    apply_Txi,
    assemble_Opd,
    build_grid,
    coarea_check,
    gaussian_poly_suite,
    slice_continuity_probe,
    slice_integrals,
    strong_commutation_check,
    uniform_grid,
)
from weylred.fiber import multiplication_op
from weylred.geometry import (
    LevelSetModel,
    NotTangent,
    ScalarHamiltonian,
    TestFunction,
    radial_hamiltonian,
)
from weylred.symbols import PolySymbol, VectorField, rotation_generator


def x(a, n=2):
    return PolySymbol.x(a, n)


def sq(p):
    return np.sum(np.asarray(p) ** 2, axis=-1)


@pytest.fixture(scope="module")
def half_r2():
    return radial_hamiltonian(2)


@pytest.fixture(scope="module")
def big_grid(half_r2):
    # 200 x 256 radial grid reaching down to a tiny regular level so that
    # almost no Gaussian mass is lost near the origin
    return build_grid(half_r2, "circle", 5e-9, 18.0, 200, 256)


@pytest.fixture(scope="module")
def suite2():
    return gaussian_poly_suite(2)


class TestBuildGrid:
    def test_circle_grid_shape(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 64, 64)
        assert grid.n_lambda == 64
        assert all(isinstance(f, LevelSetModel) for f in grid.fibers)
        assert np.all(grid.lambda_nodes > 0.5 - 1e-12)
        assert np.all(grid.lambda_nodes < 2.0 + 1e-12)

    def test_singular_level(self, half_r2):
        with pytest.raises(SingularLevel):
            build_grid(half_r2, "circle", -0.5, 1.0, 8, 16)

    def test_empty_range(self, half_r2):
        with pytest.raises(EmptyRange):
            build_grid(half_r2, "circle", 2.0, 1.0)

    def test_line_fibers(self):
        phi = ScalarHamiltonian(x(0))
        grid = build_grid(phi, "line", -1.0, 1.0, 8, 64, box=5.0)
        assert grid.n_lambda == 8
        for f in grid.fibers:
            assert f.fiber_kind == "line"

    def test_unknown_kind(self, half_r2):
        with pytest.raises(ValueError):
            build_grid(half_r2, "torus", 0.5, 1.0)


class TestApplyTx:
    def test_unitarity_suite(self, big_grid, suite2):
        for u in suite2:
            s = apply_Tx(u, big_grid)
            assert abs(s.norm() ** 2 - u.analytic_l2_norm**2) < 1e-6

    def test_inner_products(self, big_grid, suite2):
        # <T u, T v> = <u, v>; the suite contains orthogonal pairs
        s0 = apply_Tx(suite2[0], big_grid)
        s1 = apply_Tx(suite2[1], big_grid)
        assert abs(s0.inner(s1)) < 1e-6  # odd x even
        # non-orthogonal pair: <gaussian, narrow-gaussian> = (2 pi/3)
        s2 = apply_Tx(suite2[2], big_grid)
        exact = (2 * math.pi / 3) ** (2 / 2)
        assert s0.inner(s2).real == pytest.approx(exact, abs=1e-6)

    def test_multiplication_intertwining(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 16, 64)
        u = suite2[0]
        phiu = TestFunction(
            value=lambda p: 0.5 * sq(p) * np.exp(-0.5 * sq(p)),
            gradient=u.gradient,
        )
        lhs = apply_Tx(phiu, grid)
        base = apply_Tx(u, grid)
        for lam, a, b in zip(grid.lambda_nodes, lhs.parts, base.parts):
            assert np.max(np.abs(a - lam * b)) < 1e-12

    def test_zero_function(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 4, 16)
        z = TestFunction(value=lambda p: np.zeros(len(np.atleast_2d(p))), gradient=lambda p: np.zeros(2))
        s = apply_Tx(z, grid)
        assert s.norm() == 0.0


class TestAdjoint:
    def test_round_trip_at_nodes(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        u = suite2[0]
        s = apply_Tx(u, grid)
        probes = np.vstack([grid.fibers[2].nodes[::5], grid.fibers[6].nodes[::7]])
        got = apply_Tx_adjoint(s, probes)
        want = np.exp(-0.5 * sq(probes))
        assert np.max(np.abs(got - want)) < 1e-12

    def test_off_fiber_probe(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        s = apply_Tx(suite2[0], grid)
        with pytest.raises(ValueError):
            apply_Tx_adjoint(s, np.array([[97.0, 0.0]]))

    def test_zero_section(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 4, 16)
        s = DirectIntegralSection(grid, [np.zeros(16, dtype=complex)] * 4)
        got = apply_Tx_adjoint(s, grid.fibers[0].nodes[:3])
        assert np.allclose(got, 0.0)

    def test_transposed_intertwining(self, half_r2, suite2):
        # T*(lambda . T u) reproduces phi*u at nodes
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        s = apply_Tx(suite2[0], grid)
        scaled = DirectIntegralSection(
            grid, [lam * p for lam, p in zip(grid.lambda_nodes, s.parts)]
        )
        probes = grid.fibers[3].nodes[::6]
        got = apply_Tx_adjoint(scaled, probes)
        want = 0.5 * sq(probes) * np.exp(-0.5 * sq(probes))
        assert np.max(np.abs(got - want)) < 1e-12


class TestCoarea:
    def test_gaussian_value(self, big_grid, suite2):
        # [PAPER-ADJACENT DERIVED] both sides equal pi^{3/2}/2
        f = suite2[2]
        assert coarea_check(f, big_grid) < 1e-8
        lhs = ambient_integral(
            lambda pts: np.exp(-sq(pts)) * np.sqrt(sq(pts)), 2
        )
        assert lhs == pytest.approx(math.pi**1.5 / 2, abs=1e-12)

    def test_zero_function(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        z = TestFunction(value=lambda p: np.zeros(len(np.atleast_2d(p))), gradient=None)
        assert coarea_check(z, grid) == 0.0

    def test_smoothed_annulus(self, half_r2):
        grid = build_grid(half_r2, "circle", 5e-9, 18.0, 100, 64)

        def annulus(pts):
            r2 = sq(pts)
            return np.exp(-4 * (r2 - 2.0) ** 2)

        f = TestFunction(value=annulus, gradient=None)
        assert coarea_check(f, grid) < 1e-6

    def test_refinement_monotone(self, half_r2, suite2):
        f = suite2[2]
        resids = []
        for nl, nf in ((3, 8), (6, 16), (12, 32), (24, 64)):
            grid = build_grid(half_r2, "circle", 5e-9, 18.0, nl, nf)
            resids.append(coarea_check(f, grid))
        assert all(a > b for a, b in zip(resids, resids[1:])), resids


class TestApplyTxi:
    def test_gaussian_self_dual(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        s_x = apply_Tx(suite2[0], grid)
        s_xi = apply_Txi(suite2[0], grid)
        for a, b in zip(s_x.parts, s_xi.parts):
            assert np.max(np.abs(a - b)) == 0.0

    def test_laplacian_intertwining(self, half_r2, suite2):
        # T_xi(-Delta u / 2)(lambda) = lambda T_xi u(lambda), exactly at
        # nodes for analytic-transform inputs
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        u = suite2[0]
        minus_half_lap = TestFunction(
            value=u.value,
            gradient=None,
            fourier=lambda p: 0.5 * sq(p) * np.exp(-0.5 * sq(p)),
        )
        lhs = apply_Txi(minus_half_lap, grid)
        base = apply_Txi(u, grid)
        for lam, a, b in zip(grid.lambda_nodes, lhs.parts, base.parts):
            assert np.max(np.abs(a - lam * b)) < 1e-12

    def test_unitarity(self, big_grid, suite2):
        for u in suite2:
            s = apply_Txi(u, big_grid)
            assert abs(s.norm() ** 2 - u.analytic_l2_norm**2) < 1e-6

    def test_missing_fourier(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 4, 16)
        u = TestFunction(value=lambda p: np.exp(-sq(p)), gradient=None)
        with pytest.raises(ValueError):
            apply_Txi(u, grid)


class TestAssembleOpd:
    def test_multiplication_rule(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        rule = lambda lam, fiber, hbar: multiplication_op(lambda z: z[0], fiber)
        op = assemble_Opd(rule, grid, 1.0)
        s = apply_Tx(suite2[0], grid)
        out = op.apply(s)
        direct = apply_Tx(
            TestFunction(
                value=lambda p: np.asarray(p)[..., 0] * np.exp(-0.5 * sq(p)),
                gradient=None,
            ),
            grid,
        )
        for a, b in zip(out.parts, direct.parts):
            assert np.max(np.abs(a - b)) < 1e-12

    def test_commutes_with_diagonal(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 8, 32)
        rule = lambda lam, fiber, hbar: multiplication_op(lambda z: z[0] * z[1], fiber)
        op = assemble_Opd(rule, grid, 1.0)
        s = apply_Tx(suite2[0], grid)
        b = np.sin(grid.lambda_nodes)

        def diag(sec):
            return DirectIntegralSection(
                grid, [bi * p for bi, p in zip(b, sec.parts)]
            )

        left = diag(op.apply(s))
        right = op.apply(diag(s))
        for a, c in zip(left.parts, right.parts):
            # equality up to reordering of the scalar multiplications
            assert np.max(np.abs(a - c)) < 1e-15

    def test_zero_rule(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 4, 16)
        rule = lambda lam, fiber, hbar: (lambda u: type(u)(u.fiber, 0 * u.values))
        op = assemble_Opd(rule, grid, 1.0)
        assert op.apply(apply_Tx(suite2[0], grid)).norm() == 0.0

    def test_rule_failure_names_lambda(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 4, 16)

        def bad(lam, fiber, hbar):
            raise KeyError("boom")

        with pytest.raises(RuntimeError, match="lambda="):
            assemble_Opd(bad, grid, 1.0)


class TestStrongCommutation:
    def test_circle_rotation(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.3, 6.0, 16, 256)
        Y = rotation_generator(0, 1, 2)
        for u in (suite2[0], suite2[3]):
            assert strong_commutation_check(Y, u, 0.5, grid) < 1e-6

    def test_sphere_rotation(self):
        h3 = radial_hamiltonian(3)
        grid = build_grid(h3, "sphere2", 0.3, 6.0, 8, n_polar=20, n_azimuth=40)
        Y = rotation_generator(0, 1, 3)
        u = gaussian_poly_suite(3)[3]
        assert strong_commutation_check(Y, u, 0.5, grid) < 1e-6

    def test_ellipse_continuation_fibers(self, suite2):
        phi = ScalarHamiltonian((x(0) * x(0) + 2 * (x(1) * x(1))) * Fraction(1, 2))
        grid = build_grid(phi, "implicit-curve", 0.3, 5.0, 8, 256)
        Y = VectorField(2, (-2 * x(1), x(0)))
        assert strong_commutation_check(Y, suite2[3], 0.5, grid) < 1e-5

    def test_radial_field_rejected(self, half_r2, suite2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 4, 32)
        Y = VectorField(2, (x(0), x(1)))
        with pytest.raises(NotTangent):
            strong_commutation_check(Y, suite2[0], 1.0, grid)


class TestSliceContinuity:
    def test_radial_gaussian_smoothness(self, half_r2):
        grid = uniform_grid(half_r2, "circle", 0.5, 2.0, 41, 128)
        u = TestFunction(value=lambda p: np.exp(-sq(p)), gradient=None)
        probe = slice_continuity_probe(u, grid)
        # analytic F(lam) = 2 pi sqrt(2 lam) e^{-2 lam}; bound its second
        # derivative on [0.5, 2] by sampling
        lam = np.linspace(0.5, 2.0, 2001)
        F = 2 * math.pi * np.sqrt(2 * lam) * np.exp(-2 * lam)
        second = np.abs(np.diff(F, 2)) / (lam[1] - lam[0]) ** 2
        assert probe <= np.max(second) + 1e-4

    def test_matches_analytic_values(self, half_r2):
        grid = uniform_grid(half_r2, "circle", 0.5, 2.0, 11, 64)
        u = TestFunction(value=lambda p: np.exp(-sq(p)), gradient=None)
        F = slice_integrals(u, grid)
        want = 2 * math.pi * np.sqrt(2 * grid.lambda_nodes) * np.exp(
            -2 * grid.lambda_nodes
        )
        assert np.max(np.abs(F - want)) < 1e-12

    def test_zero_function(self, half_r2):
        grid = uniform_grid(half_r2, "circle", 0.5, 2.0, 9, 32)
        z = TestFunction(value=lambda p: np.zeros(len(np.atleast_2d(p))), gradient=None)
        assert slice_continuity_probe(z, grid) == 0.0

    def test_nonuniform_grid_rejected(self, half_r2):
        grid = build_grid(half_r2, "circle", 0.5, 2.0, 9, 32)
        u = TestFunction(value=lambda p: np.exp(-sq(p)), gradient=None)
        with pytest.raises(ValueError):
            slice_continuity_probe(u, grid)


class TestSuiteFactory:
    @pytest.mark.parametrize("n", [2, 3])
    def test_gradients(self, n):
        rng = np.random.default_rng(17)
        probes = rng.uniform(-1.5, 1.5, size=(4, n))
        for u in gaussian_poly_suite(n):
            assert u.check_gradient(probes) < 1e-6, u.name

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            gaussian_poly_suite(4)
