"""Level-set geometry of J = (phi_1, ..., phi_k).

Densities from the Gram determinant of the gradients, projections onto the
tangent spaces, induced divergence on fibers, the ambient J_Y operator, and
quadrature models of single level sets (circles, 2-spheres, implicit planar
curves, affine lines).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .symbols import PolySymbol, VectorField

REGULARITY_THRESHOLD = 1e-8
TANGENCY_TOL = 1e-9
NODE_TOL = 1e-9


class SingularPoint(ValueError):
    """The wedge norm of DJ vanishes (point in the singular set)."""


class NotTangent(ValueError):
    """The vector field fails to be tangent to the level sets."""


class ParametrizationUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class ScalarHamiltonian:
    """A position-only Hamiltonian phi with cached exact derivatives."""

    phi: PolySymbol
    gradient: VectorField = field(init=False)
    hessian: Tuple[Tuple[PolySymbol, ...], ...] = field(init=False)

    def __post_init__(self):
        if not self.phi.is_xi_free() or not self.phi.is_hbar_free():
            raise ValueError("a ScalarHamiltonian must be xi- and hbar-free")
        n = self.phi.dimension
        grads = tuple(self.phi.partial("x", a) for a in range(n))
        object.__setattr__(self, "gradient", VectorField(n, grads))
        hess = tuple(
            tuple(grads[a].partial("x", b) for b in range(n)) for a in range(n)
        )
        object.__setattr__(self, "hessian", hess)

    @property
    def dimension(self) -> int:
        return self.phi.dimension

    def value(self, x) -> float:
        return self.phi.evaluate(x, np.zeros(self.dimension)).real

    def grad(self, x) -> np.ndarray:
        return self.gradient.evaluate(x)

    def hess(self, x) -> np.ndarray:
        n = self.dimension
        zero = np.zeros(n)
        return np.array(
            [
                [self.hessian[a][b].evaluate(x, zero).real for b in range(n)]
                for a in range(n)
            ]
        )


def radial_hamiltonian(n: int, half: bool = True) -> ScalarHamiltonian:
    """phi = |x|^2/2 (or |x|^2 when half=False)."""
    phi = PolySymbol.zero(n)
    for a in range(n):
        phi = phi + PolySymbol.x(a, n) * PolySymbol.x(a, n)
    if half:
        from fractions import Fraction

        phi = phi * Fraction(1, 2)
    return ScalarHamiltonian(phi)


@dataclass
class TestFunction:
    """A smooth ambient function with analytic derivative data.

    `fourier` (when present) is the unitary, hbar-free Fourier transform
    (2 pi)^{-n/2} int u(x) e^{-i<x,xi>} dx, used by the momentum-side
    decomposition.
    """

    __test__ = False  # not a pytest class despite the name

    value: Callable[[np.ndarray], complex]
    gradient: Callable[[np.ndarray], np.ndarray]
    analytic_l2_norm: Optional[float] = None
    fourier: Optional[Callable[[np.ndarray], complex]] = None
    name: str = ""

    def check_gradient(self, probes: np.ndarray, h: float = 1e-6, rtol: float = 1e-6) -> float:
        """Max relative deviation of the analytic gradient vs central FD."""
        worst = 0.0
        for p in np.atleast_2d(probes):
            g = np.asarray(self.gradient(p))
            fd = np.zeros_like(g, dtype=complex)
            for a in range(len(p)):
                e = np.zeros(len(p))
                e[a] = h
                fd[a] = (self.value(p + e) - self.value(p - e)) / (2 * h)
            scale = 1.0 + np.linalg.norm(g)
            worst = max(worst, float(np.linalg.norm(g - fd) / scale))
        return worst


# -- pointwise geometry ------------------------------------------------


def gram_matrix(hams: Sequence[ScalarHamiltonian], x) -> np.ndarray:
    grads = np.array([h.grad(x) for h in hams])
    return grads @ grads.T


def jacobian_wedge_norm(hams: Sequence[ScalarHamiltonian], x) -> float:
    """||wedge^k DJ(x)|| = sqrt(det Gram(grad phi_1, ..., grad phi_k))."""
    hams = _as_ham_list(hams)
    det = np.linalg.det(gram_matrix(hams, x))
    return math.sqrt(max(det, 0.0))


def rho(hams, x, threshold: float = REGULARITY_THRESHOLD) -> float:
    """Density rho(x) = ||wedge^k DJ(x)||^{-1} on the regular set."""
    w = jacobian_wedge_norm(hams, x)
    if w <= threshold:
        raise SingularPoint(f"wedge norm {w:.3e} below threshold at {x}")
    return 1.0 / w


def project_qx(hams, x, xi, threshold: float = REGULARITY_THRESHOLD) -> np.ndarray:
    """Orthogonal projection of xi onto <grad phi_1(x),...>^perp."""
    hams = _as_ham_list(hams)
    if jacobian_wedge_norm(hams, x) <= threshold:
        raise SingularPoint(f"cannot project at singular point {x}")
    grads = np.array([h.grad(x) for h in hams])
    q, _ = np.linalg.qr(grads.T)
    xi = np.asarray(xi, dtype=float)
    return xi - q @ (q.T @ xi)


def tangency_residual(Y: VectorField, hams, x) -> float:
    """max_j |<Y(x), grad phi_j(x)>|; zero certifies tangency at x."""
    hams = _as_ham_list(hams)
    y = Y.evaluate(x)
    return max(abs(float(np.dot(y, h.grad(x)))) for h in hams)


def ambient_JY_apply(Y: VectorField, u: TestFunction, hbar: float, x) -> complex:
    """(-i hbar (Y + div Y / 2) u)(x), with div Y evaluated exactly."""
    x = np.asarray(x, dtype=float)
    y = Y.evaluate(x)
    div = Y.divergence().evaluate(x, np.zeros(Y.dimension)).real
    grad = np.asarray(u.gradient(x))
    return -1j * hbar * (np.dot(y, grad) + 0.5 * div * u.value(x))


def _as_ham_list(hams) -> List[ScalarHamiltonian]:
    if isinstance(hams, ScalarHamiltonian):
        return [hams]
    return list(hams)


def _gram_det_symbol(hams: List[ScalarHamiltonian]) -> PolySymbol:
    """det of the polynomial Gram matrix of the gradients."""
    n = hams[0].dimension
    k = len(hams)
    G = [
        [
            sum(
                (
                    hams[j].gradient.components[a] * hams[m].gradient.components[a]
                    for a in range(n)
                ),
                PolySymbol.zero(n),
            )
            for m in range(k)
        ]
        for j in range(k)
    ]
    import itertools

    det = PolySymbol.zero(n)
    for perm in itertools.permutations(range(k)):
        sign = 1
        seen = list(perm)
        # parity via inversion count
        inversions = sum(
            1 for i in range(k) for j in range(i + 1, k) if seen[i] > seen[j]
        )
        sign = -1 if inversions % 2 else 1
        term = PolySymbol.one(n)
        for j in range(k):
            term = term * G[j][perm[j]]
        det = det + sign * term
    return det


def induced_divergence(
    Y: VectorField,
    hams,
    z,
    *,
    threshold: float = REGULARITY_THRESHOLD,
    tangency_tol: float = 1e-8,
) -> float:
    """div of the induced field Y^lambda on the level set through z.

    k=1 closed form: div Y + <Hess[phi] Y, grad phi> / ||grad phi||^2.
    General k: div Y - Y(log rho) with rho = det(Gram)^{-1/2}, evaluated
    through the exact polynomial Gram determinant. The two coincide for k=1.
    """
    hams = _as_ham_list(hams)
    z = np.asarray(z, dtype=float)
    if jacobian_wedge_norm(hams, z) <= threshold:
        raise SingularPoint(f"singular point {z}")
    if tangency_residual(Y, hams, z) > tangency_tol:
        raise NotTangent(
            f"field is not tangent at {z} (residual {tangency_residual(Y, hams, z):.3e})"
        )
    n = Y.dimension
    zero = np.zeros(n)
    div_y = Y.divergence().evaluate(z, zero).real
    if len(hams) == 1:
        h = hams[0]
        g = h.grad(z)
        correction = float(h.hess(z) @ Y.evaluate(z) @ g) / float(g @ g)
        return div_y + correction
    det_sym = _gram_det_symbol(hams)
    det_val = det_sym.evaluate(z, zero).real
    y_det = Y.apply_to(det_sym).evaluate(z, zero).real
    # Y(log rho) = -Y(det)/2det; div Y^lambda = div Y - Y(log rho)
    return div_y + 0.5 * y_det / det_val


def moment_map_eval(generators: Sequence[VectorField], x, xi) -> np.ndarray:
    """(<xi, zeta_a(x)>)_a for the given Lie algebra generators."""
    xi = np.asarray(xi, dtype=float)
    return np.array([float(np.dot(xi, Z.evaluate(x))) for Z in generators])


# -- level set models --------------------------------------------------


@dataclass
class LevelSetModel:
    """One fiber of the level-set foliation, with quadrature and density.

    nodes carry weights discretizing the Riemannian measure eta_lambda and
    rho at every node; `chart` exposes the parametrization used for the
    finite-difference divergence oracle.
    """

    hamiltonians: List[ScalarHamiltonian]
    level: np.ndarray
    fiber_kind: str
    nodes: np.ndarray
    weights: np.ndarray
    rho_values: np.ndarray
    chart: Optional["FiberChart"] = None

    def __post_init__(self):
        self.level = np.atleast_1d(np.asarray(self.level, dtype=float))
        for i, z in enumerate(self.nodes):
            for h, lam in zip(self.hamiltonians, self.level):
                if abs(h.value(z) - lam) > NODE_TOL * (1 + abs(lam)):
                    raise ValueError(
                        f"node {i} off the level set: phi={h.value(z)} vs {lam}"
                    )
        if not np.all(np.isfinite(self.rho_values)) or np.any(self.rho_values <= 0):
            raise SingularPoint("rho must be finite and positive at every node")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]

    def volume(self) -> float:
        return float(self.weights.sum())


@dataclass
class FiberChart:
    """Parametrization data for the FD divergence oracle.

    kind 'circle'/'implicit-curve': point(t), velocity(t) for t in [0, 2pi).
    kind 'sphere2': ambient radius only; charts are built per-node.
    """

    kind: str
    point: Optional[Callable[[float], np.ndarray]] = None
    velocity: Optional[Callable[[float], np.ndarray]] = None
    radius: Optional[float] = None
    params: Optional[np.ndarray] = None  # chart parameter per node


def _radial_newton(phi: ScalarHamiltonian, direction: np.ndarray, lam: float, r0: float) -> float:
    """Solve phi(r * direction) = lam for r > 0 by Newton iteration."""
    r = r0
    for _ in range(60):
        z = r * direction
        f = phi.value(z) - lam
        df = float(np.dot(phi.grad(z), direction))
        if df == 0:
            raise SingularPoint("radial derivative vanished during continuation")
        step = f / df
        r -= step
        if abs(step) < 1e-14 * (1 + abs(r)):
            break
    else:
        raise SingularPoint("radial Newton did not converge")
    if r <= 0:
        raise SingularPoint("level curve is not star-shaped around the origin")
    return r


def circle_level_set(
    phi: ScalarHamiltonian, lam: float, n_nodes: int = 256
) -> LevelSetModel:
    """Circle fiber of a radial phi on R^2."""
    if phi.dimension != 2:
        raise ValueError("circle fibers need ambient dimension 2")
    r = _radial_newton(phi, np.array([1.0, 0.0]), lam, max(math.sqrt(abs(lam)) + 0.5, 0.5))
    thetas = 2 * math.pi * np.arange(n_nodes) / n_nodes
    nodes = r * np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    weights = np.full(n_nodes, 2 * math.pi * r / n_nodes)
    rho_values = np.array([rho([phi], z) for z in nodes])

    def point(t: float) -> np.ndarray:
        return r * np.array([math.cos(t), math.sin(t)])

    def velocity(t: float) -> np.ndarray:
        return r * np.array([-math.sin(t), math.cos(t)])

    chart = FiberChart(kind="circle", point=point, velocity=velocity, radius=r, params=thetas)
    return LevelSetModel([phi], np.array([lam]), "circle", nodes, weights, rho_values, chart)


def implicit_curve_level_set(
    phi: ScalarHamiltonian, lam: float, n_nodes: int = 256
) -> LevelSetModel:
    """Closed planar level curve, parametrized by polar-angle continuation.

    The predictor is the previous radius; the corrector is a radial Newton
    solve. Arc-length weights come from the analytic velocity |dz/dt| on a
    uniform parameter grid (trapezoid rule; spectral for smooth curves).
    """
    if phi.dimension != 2:
        raise ValueError("implicit-curve fibers need ambient dimension 2")

    def solve_r(t: float, r0: float) -> float:
        return _radial_newton(phi, np.array([math.cos(t), math.sin(t)]), lam, r0)

    def point(t: float) -> np.ndarray:
        d = np.array([math.cos(t), math.sin(t)])
        return solve_r(t % (2 * math.pi), 1.0 + math.sqrt(abs(lam))) * d

    def velocity(t: float) -> np.ndarray:
        z = point(t)
        d = z / np.linalg.norm(z)
        dp = np.array([-d[1], d[0]])
        g = phi.grad(z)
        r = float(np.linalg.norm(z))
        denom = float(np.dot(g, d))
        rprime = -r * float(np.dot(g, dp)) / denom
        return rprime * d + r * dp

    thetas = 2 * math.pi * np.arange(n_nodes) / n_nodes
    radii = np.empty(n_nodes)
    r_pred = 1.0 + math.sqrt(abs(lam))
    for i, t in enumerate(thetas):
        radii[i] = solve_r(t, r_pred)
        r_pred = radii[i]
    nodes = radii[:, None] * np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    speeds = np.array([np.linalg.norm(velocity(t)) for t in thetas])
    weights = speeds * (2 * math.pi / n_nodes)
    rho_values = np.array([rho([phi], z) for z in nodes])
    chart = FiberChart(
        kind="implicit-curve", point=point, velocity=velocity, params=thetas
    )
    return LevelSetModel(
        [phi], np.array([lam]), "implicit-curve", nodes, weights, rho_values, chart
    )


def sphere2_level_set(
    phi: ScalarHamiltonian,
    lam: float,
    n_polar: int = 24,
    n_azimuth: int = 48,
) -> LevelSetModel:
    """2-sphere fiber of a radial phi on R^3 (Gauss-Legendre x trapezoid)."""
    if phi.dimension != 3:
        raise ValueError("sphere2 fibers need ambient dimension 3")
    r = _radial_newton(phi, np.array([1.0, 0.0, 0.0]), lam, max(math.sqrt(abs(lam)) + 0.5, 0.5))
    mu, wmu = np.polynomial.legendre.leggauss(n_polar)  # mu = cos(polar)
    betas = 2 * math.pi * np.arange(n_azimuth) / n_azimuth
    nodes = []
    weights = []
    for m, wm in zip(mu, wmu):
        s = math.sqrt(1 - m * m)
        for b in betas:
            nodes.append([r * s * math.cos(b), r * s * math.sin(b), r * m])
            weights.append(r * r * wm * 2 * math.pi / n_azimuth)
    nodes = np.array(nodes)
    weights = np.array(weights)
    rho_values = np.array([rho([phi], z) for z in nodes])
    chart = FiberChart(kind="sphere2", radius=r)
    return LevelSetModel(
        [phi], np.array([lam]), "sphere2", nodes, weights, rho_values, chart
    )


def line_level_set(
    phi: ScalarHamiltonian, lam: float, box: float = 8.0, n_nodes: int = 256
) -> LevelSetModel:
    """Affine-line fiber of a linear phi on R^2, truncated to [-box, box]."""
    if phi.dimension != 2:
        raise ValueError("line fibers need ambient dimension 2")
    c = phi.grad(np.zeros(2))
    norm_c = float(np.linalg.norm(c))
    if norm_c <= REGULARITY_THRESHOLD:
        raise SingularPoint("linear hamiltonian has vanishing gradient")
    const = phi.value(np.zeros(2))
    x0 = (lam - const) * c / norm_c**2
    d = np.array([-c[1], c[0]]) / norm_c
    t, wt = np.polynomial.legendre.leggauss(n_nodes)
    t = t * box
    wt = wt * box
    nodes = x0[None, :] + t[:, None] * d[None, :]
    rho_values = np.array([rho([phi], z) for z in nodes])
    chart = FiberChart(
        kind="line",
        point=lambda s: x0 + s * d,
        velocity=lambda s: d.copy(),
        params=t,
    )
    return LevelSetModel(
        [phi], np.array([lam]), "line", nodes, wt.copy(), rho_values, chart
    )


# -- finite-difference divergence oracle -------------------------------


def _curve_divergence_fd(Y: VectorField, chart: FiberChart, t: float, h: float = 1e-5) -> float:
    """(sigma v)'(t) / sigma(t) with sigma = |dz/dt|, v = <Y, dz/dt>/sigma^2."""

    def sigma_v(s: float) -> Tuple[float, float]:
        vel = chart.velocity(s)
        sig = float(np.linalg.norm(vel))
        z = chart.point(s)
        v = float(np.dot(Y.evaluate(z), vel)) / sig**2
        return sig, v

    sig_p, v_p = sigma_v(t + h)
    sig_m, v_m = sigma_v(t - h)
    sig0, _ = sigma_v(t)
    return (sig_p * v_p - sig_m * v_m) / (2 * h * sig0)


def _sphere_divergence_fd(Y: VectorField, r: float, z: np.ndarray, h: float = 1e-5) -> float:
    """FD divergence on the r-sphere in a rotated spherical chart at z."""
    axis_idx = int(np.argmin(np.abs(z)))
    e3 = np.zeros(3)
    e3[axis_idx] = 1.0
    e1 = np.cross(e3, z / r)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e3, e1)

    def point(alpha: float, beta: float) -> np.ndarray:
        return r * (
            math.sin(alpha) * (math.cos(beta) * e1 + math.sin(beta) * e2)
            + math.cos(alpha) * e3
        )

    # chart coordinates of z
    alpha0 = math.acos(np.clip(np.dot(z, e3) / r, -1, 1))
    beta0 = math.atan2(np.dot(z, e2), np.dot(z, e1))

    def comps(alpha: float, beta: float) -> Tuple[float, float, float]:
        p = point(alpha, beta)
        da = r * (
            math.cos(alpha) * (math.cos(beta) * e1 + math.sin(beta) * e2)
            - math.sin(alpha) * e3
        )
        db = r * math.sin(alpha) * (-math.sin(beta) * e1 + math.cos(beta) * e2)
        y = Y.evaluate(p)
        va = float(np.dot(y, da)) / (r * r)
        vb = float(np.dot(y, db)) / (r * r * math.sin(alpha) ** 2)
        sqrt_g = r * r * math.sin(alpha)
        return va, vb, sqrt_g

    _, _, sg0 = comps(alpha0, beta0)
    va_p, _, sg_ap = comps(alpha0 + h, beta0)
    va_m, _, sg_am = comps(alpha0 - h, beta0)
    _, vb_p, _ = comps(alpha0, beta0 + h)
    _, vb_m, _ = comps(alpha0, beta0 - h)
    d_alpha = (sg_ap * va_p - sg_am * va_m) / (2 * h)
    sg_b = sg0  # sqrt(g) is beta-independent
    d_beta = sg_b * (vb_p - vb_m) / (2 * h)
    return (d_alpha + d_beta) / sg0


def intrinsic_divergence_fd(Y: VectorField, model: LevelSetModel, z) -> float:
    """Chart finite-difference divergence of the induced field at a node.

    Independent oracle for `induced_divergence`; never uses the Hessian
    closed form.
    """
    chart = model.chart
    if chart is None:
        raise ParametrizationUnavailable(f"no chart for fiber kind {model.fiber_kind}")
    z = np.asarray(z, dtype=float)
    if chart.kind in ("circle", "implicit-curve", "line"):
        # locate the chart parameter of z
        idx = int(np.argmin(np.linalg.norm(model.nodes - z, axis=1)))
        t = float(chart.params[idx])
        if np.linalg.norm(model.nodes[idx] - z) > 1e-9:
            raise ParametrizationUnavailable("probe point is not a fiber node")
        return _curve_divergence_fd(Y, chart, t)
    if chart.kind == "sphere2":
        return _sphere_divergence_fd(Y, chart.radius, z)
    raise ParametrizationUnavailable(f"unsupported chart kind {chart.kind}")
