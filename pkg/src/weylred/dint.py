"""Direct-integral decomposition over the level sets of a scalar map.

Builds lambda-grids of fibers, the slicing isometry T_x (and its momentum
twin T_xi), coarea and unitarity diagnostics, fiberwise assembly of
decomposable operators, and the strong-commutation residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .fiber import FiberFunction, FiberOperator, SphereFiber, fiber_JX_apply
from .geometry import (
    LevelSetModel,
    ScalarHamiltonian,
    SingularPoint,
    TestFunction,
    ambient_JY_apply,
    circle_level_set,
    implicit_curve_level_set,
    jacobian_wedge_norm,
    line_level_set,
    rho as rho_at,
    _radial_newton,
)
from .sweep import semiclassical_sweep  # re-exported fiberwise sweep  # noqa: F401
from .symbols import VectorField

SNAP_TOL = 1e-8


class SingularLevel(ValueError):
    """A lambda node touches the singular set of the level map."""


class EmptyRange(ValueError):
    pass


@dataclass
class LambdaGrid:
    """Discretized direct integral: lambda nodes x one fiber per node.

    lambda_weights discretize Lebesgue measure on the regular range (the
    spectral measure of the decomposition); rho holds the coarea density
    at every fiber node.
    """

    hamiltonians: List[ScalarHamiltonian]
    lambda_nodes: np.ndarray
    lambda_weights: np.ndarray
    fibers: List[object]
    rho: List[np.ndarray]

    def __post_init__(self):
        if np.any(self.lambda_weights <= 0):
            raise ValueError("lambda weights must be positive")

    @property
    def dimension(self) -> int:
        return self.hamiltonians[0].dimension

    @property
    def n_lambda(self) -> int:
        return len(self.lambda_nodes)


def build_grid(
    hamiltonian: ScalarHamiltonian,
    fiber_kind: str,
    lam_min: float,
    lam_max: float,
    n_lambda: int = 64,
    fiber_nodes: int = 256,
    *,
    n_polar: int = 24,
    n_azimuth: int = 48,
    box: float = 8.0,
    substitution: str = "auto",
) -> LambdaGrid:
    """Gauss-Legendre lambda grid with one fiber per node.

    For the radial kinds (circle, sphere2) `substitution='auto'` places the
    Gauss nodes in the fiber radius and carries the Jacobian lambda'(r)
    into the weights; this keeps the lambda integrals spectrally accurate
    down to very small regular levels (where integrands behave like
    fractional powers of lambda).
    """
    if lam_max <= lam_min:
        raise EmptyRange(f"empty lambda range [{lam_min}, {lam_max}]")
    radial = fiber_kind in ("circle", "sphere2")
    use_radial_sub = substitution == "radial" or (substitution == "auto" and radial)
    t, wt = np.polynomial.legendre.leggauss(n_lambda)
    e1 = np.zeros(hamiltonian.dimension)
    e1[0] = 1.0
    try:
        if use_radial_sub:
            r_lo = _radial_newton(hamiltonian, e1, lam_min, max(math.sqrt(abs(lam_min)), 1e-3))
            r_hi = _radial_newton(hamiltonian, e1, lam_max, max(math.sqrt(abs(lam_max)), 1e-3))
            r_nodes = 0.5 * (r_hi - r_lo) * t + 0.5 * (r_hi + r_lo)
            r_w = 0.5 * (r_hi - r_lo) * wt
            lam_nodes = np.array([hamiltonian.value(r * e1) for r in r_nodes])
            jac = np.array([float(np.dot(hamiltonian.grad(r * e1), e1)) for r in r_nodes])
            lam_weights = r_w * jac
        else:
            lam_nodes = 0.5 * (lam_max - lam_min) * t + 0.5 * (lam_max + lam_min)
            lam_weights = 0.5 * (lam_max - lam_min) * wt
        fibers: List[object] = []
        rho_list: List[np.ndarray] = []
        for lam in lam_nodes:
            if fiber_kind == "circle":
                model = circle_level_set(hamiltonian, float(lam), fiber_nodes)
                fibers.append(model)
                rho_list.append(model.rho_values)
            elif fiber_kind == "sphere2":
                r = _radial_newton(hamiltonian, e1, float(lam), max(math.sqrt(abs(lam)), 1e-3))
                fiber = SphereFiber.sphere(r, n_polar, n_azimuth)
                fibers.append(fiber)
                rho_list.append(
                    np.array([rho_at([hamiltonian], z) for z in fiber.nodes])
                )
            elif fiber_kind == "implicit-curve":
                model = implicit_curve_level_set(hamiltonian, float(lam), fiber_nodes)
                fibers.append(model)
                rho_list.append(model.rho_values)
            elif fiber_kind == "line":
                model = line_level_set(hamiltonian, float(lam), box, fiber_nodes)
                fibers.append(model)
                rho_list.append(model.rho_values)
            else:
                raise ValueError(f"unknown fiber kind {fiber_kind!r}")
    except SingularPoint as exc:
        raise SingularLevel(str(exc)) from exc
    return LambdaGrid([hamiltonian], lam_nodes, lam_weights, fibers, rho_list)


@dataclass
class DirectIntegralSection:
    grid: LambdaGrid
    parts: List[np.ndarray]

    def __post_init__(self):
        if len(self.parts) != self.grid.n_lambda:
            raise ValueError("one part per lambda node required")
        for p, f in zip(self.parts, self.grid.fibers):
            if len(p) != len(f.nodes):
                raise ValueError("part length does not match its fiber")

    def norm(self) -> float:
        return math.sqrt(self.inner(self).real)

    def inner(self, other: "DirectIntegralSection") -> complex:
        total = 0.0 + 0j
        for w, f, p, q in zip(
            self.grid.lambda_weights, self.grid.fibers, self.parts, other.parts
        ):
            total += w * complex(np.sum(f.weights * np.conj(p) * q))
        return total


def _eval_many(func: Callable, pts: np.ndarray) -> np.ndarray:
    """Evaluate a scalar field at many points, vectorized when possible."""
    try:
        out = np.asarray(func(pts))
        if out.shape == (len(pts),):
            return out
    except Exception:
        pass
    return np.asarray([func(p) for p in pts])


def apply_Tx(u: TestFunction, grid: LambdaGrid) -> DirectIntegralSection:
    """[T_x u](lambda)(z) = rho(z)^{1/2} u(z) sampled on the fibers."""
    parts = []
    for fiber, rho in zip(grid.fibers, grid.rho):
        vals = _eval_many(u.value, np.asarray(fiber.nodes, dtype=float))
        parts.append(np.sqrt(rho) * vals.astype(complex))
    return DirectIntegralSection(grid, parts)


def apply_Tx_adjoint(
    s: DirectIntegralSection, probes: np.ndarray, snap_tol: float = SNAP_TOL
) -> np.ndarray:
    """rho^{-1/2} s(lambda(x))(x) at probe points on (or snapped to) fibers."""
    grid = s.grid
    ham = grid.hamiltonians[0]
    out = np.empty(len(probes), dtype=complex)
    for k, p in enumerate(np.atleast_2d(probes)):
        lam = ham.value(p)
        i = int(np.argmin(np.abs(grid.lambda_nodes - lam)))
        if abs(grid.lambda_nodes[i] - lam) > snap_tol * (1 + abs(lam)):
            raise ValueError(f"probe {p} lies off every grid level")
        fiber = grid.fibers[i]
        d = np.linalg.norm(np.asarray(fiber.nodes) - p, axis=1)
        j = int(np.argmin(d))
        if d[j] > snap_tol * (1 + np.linalg.norm(p)):
            raise ValueError(f"probe {p} is not near a fiber node")
        out[k] = s.parts[i][j] / math.sqrt(grid.rho[i][j])
    return out


def ambient_integral(
    func: Callable,
    dimension: int,
    box: float = 8.0,
    n_r: int = 96,
    n_ang: int = 64,
    r_min: float = 0.0,
) -> float:
    """Polar/spherical quadrature of a rapidly decaying ambient field.

    Radial Gauss-Legendre on [0, box] crossed with uniform angles (n=2) or
    Gauss-Legendre in cos(polar) x uniform azimuth (n=3); smooth for
    integrands of the form (smooth) * |x| that defeat Cartesian grids.
    """
    r, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (box - r_min) * (r + 1) + r_min
    wr = 0.5 * (box - r_min) * wr
    if dimension == 2:
        th = 2 * math.pi * np.arange(n_ang) / n_ang
        R, T = np.meshgrid(r, th, indexing="ij")
        pts = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
        W = np.outer(wr * r, np.full(n_ang, 2 * math.pi / n_ang)).ravel()
    elif dimension == 3:
        mu, wmu = np.polynomial.legendre.leggauss(max(n_ang // 2, 8))
        th = 2 * math.pi * np.arange(n_ang) / n_ang
        R, M, T = np.meshgrid(r, mu, th, indexing="ij")
        S = np.sqrt(1 - M**2)
        pts = np.stack(
            [
                (R * S * np.cos(T)).ravel(),
                (R * S * np.sin(T)).ravel(),
                (R * M).ravel(),
            ],
            axis=1,
        )
        W = (
            (wr * r * r)[:, None, None]
            * wmu[None, :, None]
            * np.full(n_ang, 2 * math.pi / n_ang)[None, None, :]
        ).ravel()
    else:
        raise ValueError("ambient quadrature implemented for n = 2, 3")
    vals = _eval_many(func, pts)
    return float(np.real(np.sum(W * vals)))


def coarea_check(
    f: TestFunction,
    grid: LambdaGrid,
    *,
    box: float = 8.0,
    n_r: int = 96,
    n_ang: int = 64,
) -> float:
    """|integral of f * wedge-norm  -  sum over levels of the fiber integrals|."""
    hams = grid.hamiltonians

    def weighted(pts):
        vals = _eval_many(f.value, pts)
        wedge = np.array([jacobian_wedge_norm(hams, p) for p in pts])
        return vals * wedge

    lhs = ambient_integral(weighted, grid.dimension, box, n_r, n_ang)
    rhs = 0.0
    for w, fiber in zip(grid.lambda_weights, grid.fibers):
        vals = _eval_many(f.value, np.asarray(fiber.nodes, dtype=float))
        rhs += w * float(np.real(np.sum(fiber.weights * vals)))
    return abs(lhs - rhs)


def apply_Txi(u: TestFunction, grid: LambdaGrid) -> DirectIntegralSection:
    """T_xi = T_x composed with the unitary Fourier transform.

    Requires the analytic transform (2 pi)^{-n/2} int u e^{-i<x,xi>} dx on
    the test function; the grid fibers are then read as momentum-space
    level sets.
    """
    if u.fourier is None:
        raise ValueError("apply_Txi needs analytic Fourier data on the test function")
    parts = []
    for fiber, rho in zip(grid.fibers, grid.rho):
        vals = _eval_many(u.fourier, np.asarray(fiber.nodes, dtype=float))
        parts.append(np.sqrt(rho) * vals.astype(complex))
    return DirectIntegralSection(grid, parts)


@dataclass
class DecomposableOperator:
    """Fiberwise (lambda-diagonal) operator on sections."""

    grid: LambdaGrid
    ops: List[Callable[[FiberFunction], FiberFunction]]

    def apply(self, s: DirectIntegralSection) -> DirectIntegralSection:
        parts = []
        for fiber, op, p in zip(self.grid.fibers, self.ops, s.parts):
            parts.append(op(FiberFunction(fiber, p)).values)
        return DirectIntegralSection(self.grid, parts)


def assemble_Opd(
    rule: Callable[[float, object, float], object],
    grid: LambdaGrid,
    hbar: float,
) -> DecomposableOperator:
    """Assemble T* [direct integral of per-fiber operators] T.

    `rule(lam, fiber, hbar)` must return a FiberOperator or a callable on
    FiberFunctions for every grid level; failures are re-raised with the
    offending lambda.
    """
    ops = []
    for lam, fiber in zip(grid.lambda_nodes, grid.fibers):
        try:
            op = rule(float(lam), fiber, hbar)
        except Exception as exc:
            raise RuntimeError(f"symbol rule failed at lambda={lam}") from exc
        if isinstance(op, FiberOperator):
            ops.append(op.apply)
        else:
            ops.append(op)
    return DecomposableOperator(grid, ops)


def strong_commutation_check(
    Y: VectorField, u: TestFunction, hbar: float, grid: LambdaGrid
) -> float:
    """max over lambda of || T(Op(J_Y) u)(lam) - JY^lam (T u)(lam) ||.

    The left side restricts the ambient operator -i hbar (Y + div Y/2)
    analytically; the right side differentiates the sampled section on the
    fiber grid, so the two routes are computationally independent.
    """
    tu = apply_Tx(u, grid)
    worst = 0.0
    for i, fiber in enumerate(grid.fibers):
        nodes = np.asarray(fiber.nodes, dtype=float)
        lhs = np.sqrt(grid.rho[i]) * np.array(
            [ambient_JY_apply(Y, u, hbar, z) for z in nodes]
        )
        rhs = fiber_JX_apply(Y, hbar, FiberFunction(fiber, tu.parts[i])).values
        dist = math.sqrt(float(np.sum(fiber.weights * np.abs(lhs - rhs) ** 2)))
        worst = max(worst, dist)
    return worst


def slice_integrals(h: TestFunction, grid: LambdaGrid) -> np.ndarray:
    """F(lambda) = integral of h over the lambda fiber."""
    return np.array(
        [
            float(np.real(np.sum(f.weights * _eval_many(h.value, np.asarray(f.nodes)))))
            for f in grid.fibers
        ]
    )


def slice_continuity_probe(h: TestFunction, grid: LambdaGrid) -> float:
    """Max second divided difference of F(lambda) on a uniform lambda grid."""
    lam = grid.lambda_nodes
    steps = np.diff(lam)
    if len(lam) < 3 or np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
        raise ValueError("continuity probe needs a uniform lambda refinement")
    F = slice_integrals(h, grid)
    second = np.abs(F[2:] - 2 * F[1:-1] + F[:-2]) / steps[0] ** 2
    return float(np.max(second)) if len(second) else 0.0


def gaussian_poly_suite(n: int) -> List[TestFunction]:
    """Five Gaussian x polynomial test functions with analytic L2 norms,
    gradients and unitary Fourier transforms (all vectorized)."""
    if n not in (2, 3):
        raise ValueError("suite available for n = 2, 3")

    def sq(p):
        return np.sum(np.asarray(p) ** 2, axis=-1)

    pi_n = math.pi ** (n / 2)

    suite = [
        TestFunction(
            value=lambda p: np.exp(-0.5 * sq(p)),
            gradient=lambda p: -np.asarray(p) * math.exp(-0.5 * float(sq(p))),
            analytic_l2_norm=math.sqrt(pi_n),
            fourier=lambda p: np.exp(-0.5 * sq(p)),
            name="gaussian",
        ),
        TestFunction(
            value=lambda p: np.asarray(p)[..., 0] * np.exp(-0.5 * sq(p)),
            gradient=lambda p: (np.eye(n)[0] - p[0] * np.asarray(p))
            * math.exp(-0.5 * float(sq(p))),
            analytic_l2_norm=math.sqrt(pi_n / 2),
            fourier=lambda p: -1j * np.asarray(p)[..., 0] * np.exp(-0.5 * sq(p)),
            name="x1-gaussian",
        ),
        TestFunction(
            value=lambda p: np.exp(-sq(p)),
            gradient=lambda p: -2 * np.asarray(p) * math.exp(-float(sq(p))),
            analytic_l2_norm=math.sqrt((math.pi / 2) ** (n / 2)),
            fourier=lambda p: 2 ** (-n / 2) * np.exp(-0.25 * sq(p)),
            name="narrow-gaussian",
        ),
        TestFunction(
            value=lambda p: np.asarray(p)[..., 0]
            * np.asarray(p)[..., 1]
            * np.exp(-0.5 * sq(p)),
            gradient=lambda p: (
                np.eye(n)[0] * p[1] + np.eye(n)[1] * p[0] - p[0] * p[1] * np.asarray(p)
            )
            * math.exp(-0.5 * float(sq(p))),
            analytic_l2_norm=math.sqrt(pi_n / 4),
            fourier=lambda p: -np.asarray(p)[..., 0]
            * np.asarray(p)[..., 1]
            * np.exp(-0.5 * sq(p)),
            name="x1x2-gaussian",
        ),
        TestFunction(
            value=lambda p: (1 - sq(p)) * np.exp(-0.5 * sq(p)),
            gradient=lambda p: (-2 * np.asarray(p) - (1 - float(sq(p))) * np.asarray(p))
            * math.exp(-0.5 * float(sq(p))),
            analytic_l2_norm=math.sqrt(math.pi if n == 2 else 1.75 * pi_n),
            fourier=lambda p: (1 - n + sq(p)) * np.exp(-0.5 * sq(p)),
            name="laguerre-gaussian",
        ),
    ]
    return suite


def uniform_grid(
    hamiltonian: ScalarHamiltonian,
    fiber_kind: str,
    lam_min: float,
    lam_max: float,
    n_lambda: int,
    fiber_nodes: int = 256,
    **kwargs,
) -> LambdaGrid:
    """Uniformly spaced lambda nodes (trapezoid weights) for probes that
    need equispaced levels rather than Gauss nodes."""
    if lam_max <= lam_min:
        raise EmptyRange(f"empty lambda range [{lam_min}, {lam_max}]")
    lam = np.linspace(lam_min, lam_max, n_lambda)
    w = np.full(n_lambda, (lam_max - lam_min) / (n_lambda - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    fibers = []
    rho_list = []
    try:
        for value in lam:
            if fiber_kind == "circle":
                m = circle_level_set(hamiltonian, float(value), fiber_nodes)
            elif fiber_kind == "implicit-curve":
                m = implicit_curve_level_set(hamiltonian, float(value), fiber_nodes)
            elif fiber_kind == "line":
                m = line_level_set(hamiltonian, float(value), kwargs.get("box", 8.0), fiber_nodes)
            else:
                raise ValueError("uniform_grid supports planar fiber kinds")
            fibers.append(m)
            rho_list.append(m.rho_values)
    except SingularPoint as exc:
        raise SingularLevel(str(exc)) from exc
    return LambdaGrid([hamiltonian], lam, w, fibers, rho_list)
