"""Quantization on sphere fibers S^{n-1}_r for n = 2, 3.

Geodesic midpoint map, stereographic charts with their metric density, the
explicit midpoint kernel built from the vertical Fourier transform of a
symbol, the fiber operator -i hbar (X + div X / 2), and the associated
one-parameter flow propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import LevelSetModel, NotTangent, induced_divergence
from .symbols import VectorField

TANGENCY_TOL = 1e-8


class AntipodalPair(ValueError):
    """The midpoint map is undefined for antipodal points."""


@dataclass(frozen=True)
class SphereFiber:
    """Quadrature model of the sphere of radius r in R^n (n = 2 or 3).

    Circle grids are uniform in angle (trapezoid rule, spectral for smooth
    periodic data); 2-sphere grids are Gauss-Legendre in cos(polar) times a
    uniform azimuth grid, stored polar-major.
    """

    ambient_dim: int
    radius: float
    nodes: np.ndarray
    weights: np.ndarray
    thetas: Optional[np.ndarray] = None  # circle angle per node (n=2)
    mu: Optional[np.ndarray] = None  # cos(polar) Gauss nodes (n=3)
    n_azimuth: Optional[int] = None

    def __post_init__(self):
        r = self.radius
        norms = np.linalg.norm(self.nodes, axis=1)
        if np.max(np.abs(norms - r)) > 1e-12 * max(1.0, r):
            raise ValueError("fiber nodes are off the sphere")
        target = 2 * math.pi * r if self.ambient_dim == 2 else 4 * math.pi * r * r
        if abs(self.weights.sum() - target) > 1e-10 * target:
            raise ValueError("quadrature weights do not reproduce the volume")

    @classmethod
    def circle(cls, radius: float, n_nodes: int = 256) -> "SphereFiber":
        thetas = 2 * math.pi * np.arange(n_nodes) / n_nodes
        nodes = radius * np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
        weights = np.full(n_nodes, 2 * math.pi * radius / n_nodes)
        return cls(2, radius, nodes, weights, thetas=thetas)

    @classmethod
    def sphere(cls, radius: float, n_polar: int = 24, n_azimuth: int = 48) -> "SphereFiber":
        mu, wmu = np.polynomial.legendre.leggauss(n_polar)
        betas = 2 * math.pi * np.arange(n_azimuth) / n_azimuth
        s = np.sqrt(1 - mu**2)
        nodes = np.empty((n_polar * n_azimuth, 3))
        weights = np.empty(n_polar * n_azimuth)
        for i in range(n_polar):
            sl = slice(i * n_azimuth, (i + 1) * n_azimuth)
            nodes[sl, 0] = radius * s[i] * np.cos(betas)
            nodes[sl, 1] = radius * s[i] * np.sin(betas)
            nodes[sl, 2] = radius * mu[i]
            weights[sl] = radius * radius * wmu[i] * 2 * math.pi / n_azimuth
        return cls(3, radius, nodes, weights, mu=mu, n_azimuth=n_azimuth)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


@dataclass
class FiberFunction:
    """Node values of a function on a fiber (SphereFiber or LevelSetModel).

    `gradients` (ambient gradient per node) and `func` (ambient callable)
    are optional analytic enrichments; when present they are preferred over
    grid differentiation/interpolation.
    """

    fiber: object
    values: np.ndarray
    gradients: Optional[np.ndarray] = None
    func: Optional[Callable[[np.ndarray], complex]] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if len(self.values) != len(self.fiber.nodes):
            raise ValueError("value count does not match the fiber grid")

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.fiber.weights * np.abs(self.values) ** 2)))

    def inner(self, other: "FiberFunction") -> complex:
        return complex(np.sum(self.fiber.weights * np.conj(self.values) * other.values))


@dataclass(frozen=True)
class PWSymbol:
    """A fiber symbol given through its vertical Fourier transform.

    fhat(m, v): base points m on the sphere, vertical vectors v in the
    tangent plane at m; vectorized over leading axes; must vanish for
    ||v|| > support_radius. The optional kappa is an even cutoff on the
    tangent bundle (kappa(m, v) = kappa(m, -v)).
    """

    fhat: Callable[[np.ndarray, np.ndarray], np.ndarray]
    support_radius: float
    kappa: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class FiberOperator:
    """Dense operator on fiber node values: (Au)_i = sum_j matrix[i,j] u_j.

    For kernel constructions matrix = K * diag(weights); the quadrature-
    stripped kernel is recovered by `kernel_matrix`.
    """

    fiber: object
    matrix: np.ndarray

    def apply(self, u: FiberFunction) -> FiberFunction:
        return FiberFunction(self.fiber, self.matrix @ u.values)

    def kernel_matrix(self) -> np.ndarray:
        return self.matrix / self.fiber.weights[None, :]


def midpoint_map(z, w, r: float):
    """Geodesic midpoint of z, w on the r-sphere and half the chord velocity.

    Returns (r(z+w)/||z+w||, (r theta/2)(z-w)/||z-w||) where theta is the
    angle between z and w; (z, 0) on the diagonal.
    """
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    s = z + w
    ns = np.linalg.norm(s)
    if ns <= 1e-12 * r:
        raise AntipodalPair("midpoint map undefined for antipodal points")
    d = z - w
    nd = np.linalg.norm(d)
    if nd == 0.0:
        return z.copy(), np.zeros_like(z)
    cos_t = np.clip(np.dot(z, w) / (r * r), -1.0, 1.0)
    theta = math.acos(cos_t)
    return r * s / ns, (r * theta / 2) * d / nd


def stereo_charts(w, r: float):
    """Stereographic chart centred opposite the pole w on the r-sphere.

    Returns (psi, upsilon, density) with psi(z)_j = lam <z, w_j>/(lam - <z,w>)
    for lam = r^2 and a tangent frame (w_j) at w; upsilon is the closed-form
    inverse and density the chart volume factor (2 lam/(lam+|c|^2))^{n-1}.
    psi is singular exactly at the pole z = w; the antipode maps to 0.
    """
    w = np.asarray(w, dtype=float)
    n = len(w)
    lam = r * r
    # orthonormal tangent frame at w
    if n == 2:
        frame = np.array([[-w[1], w[0]]]) / r
    elif n == 3:
        a = np.zeros(3)
        a[int(np.argmin(np.abs(w)))] = 1.0
        e1 = np.cross(w / r, a)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(w / r, e1)
        frame = np.array([e1, e2])
    else:
        raise ValueError("charts implemented for ambient dimension 2 and 3")

    def psi(z):
        z = np.asarray(z, dtype=float)
        denom = lam - float(np.dot(z, w))
        if abs(denom) <= 1e-12 * lam:
            raise ValueError("stereographic chart is singular at the pole")
        return lam * (frame @ z) / denom

    def upsilon(c):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        q = float(c @ c)
        return ((q - lam) / (q + lam)) * w + (2 * lam / (q + lam)) * (c @ frame)

    def density(c):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        q = float(c @ c)
        return (2 * lam / (lam + q)) ** (n - 1)

    return psi, upsilon, density


def kernel_quantize(f: PWSymbol, hbar: float, fiber: SphereFiber) -> FiberOperator:
    """Midpoint-kernel operator K(z,w) = hbar^{1-n} fhat(m(z,w), v(z,w)).

    The vertical argument is the full geodesic velocity (r theta/hbar) in
    the chord direction, so that on small scales the construction matches
    the flat Weyl kernel hbar^{-d} fhat((x+y)/2, (x-y)/hbar). Antipodal
    entries vanish; the optional cutoff kappa is evaluated at the geometric
    half-velocity (the midpoint-map tangent).
    """
    if hbar == 0:
        raise ValueError("hbar must be nonzero")
    Z = fiber.nodes
    r = fiber.radius
    n = fiber.ambient_dim
    cos_t = np.clip((Z @ Z.T) / (r * r), -1.0, 1.0)
    theta = np.arccos(cos_t)
    S = Z[:, None, :] + Z[None, :, :]
    ns = np.linalg.norm(S, axis=2)
    anti = ns <= 1e-9 * r
    M = r * S / np.where(anti, 1.0, ns)[..., None]
    D = Z[:, None, :] - Z[None, :, :]
    nd = np.linalg.norm(D, axis=2)
    U = D / np.where(nd < 1e-15, 1.0, nd)[..., None]
    V = (r * theta / hbar)[..., None] * U
    K = hbar ** (1 - n) * np.asarray(f.fhat(M, V), dtype=complex)
    if f.kappa is not None:
        K = K * f.kappa(M, (r * theta / 2)[..., None] * U)
    K[anti] = 0.0
    K[(r * theta / abs(hbar)) > f.support_radius] = 0.0
    return FiberOperator(fiber, K * fiber.weights[None, :])


def multiplication_op(a: Callable[[np.ndarray], complex], fiber) -> FiberOperator:
    vals = np.array([a(z) for z in fiber.nodes], dtype=complex)
    return FiberOperator(fiber, np.diag(vals))


# -- tangential differentiation ---------------------------------------


def _spectral_derivative_periodic(values: np.ndarray) -> np.ndarray:
    """d/dt on a uniform periodic grid over [0, 2 pi)."""
    n = len(values)
    k = np.fft.fftfreq(n, d=1.0 / n)
    return np.fft.ifft(1j * k * np.fft.fft(values))


def _poly_diff_matrix(x: np.ndarray) -> np.ndarray:
    """Differentiation matrix at arbitrary distinct nodes (barycentric)."""
    n = len(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _directional_derivative(X: VectorField, u: FiberFunction) -> np.ndarray:
    """(X u)(z) at the fiber nodes for a field X tangent to the fiber."""
    fiber = u.fiber
    Z = np.asarray(fiber.nodes, dtype=float)
    if u.gradients is not None:
        return np.einsum("ia,ia->i", X.evaluate_many(Z), np.asarray(u.gradients))
    if isinstance(fiber, SphereFiber) and fiber.ambient_dim == 2:
        r = fiber.radius
        tau = np.stack([-Z[:, 1], Z[:, 0]], axis=1) / r
        speed = np.einsum("ia,ia->i", X.evaluate_many(Z), tau)
        du = _spectral_derivative_periodic(u.values)
        return speed * du / r
    if isinstance(fiber, SphereFiber) and fiber.ambient_dim == 3:
        return _sphere_tensor_derivative(X, fiber, u.values)
    if isinstance(fiber, LevelSetModel) and fiber.chart is not None:
        # uniform parameter grid; X u = <X, z'(t)> / |z'(t)|^2 * du/dt
        vel = np.array([fiber.chart.velocity(t) for t in fiber.chart.params])
        coef = np.einsum("ia,ia->i", X.evaluate_many(Z), vel) / np.einsum(
            "ia,ia->i", vel, vel
        )
        du = _spectral_derivative_periodic(u.values)
        return coef * du
    raise ValueError("no differentiation route for this fiber")


def _sphere_tensor_derivative(X: VectorField, fiber: SphereFiber, values) -> np.ndarray:
    """<X, grad u> on the Gauss-Legendre x azimuth tensor grid."""
    r = fiber.radius
    nb = fiber.n_azimuth
    mu = fiber.mu
    npol = len(mu)
    U = np.asarray(values, dtype=complex).reshape(npol, nb)
    dU_beta = np.stack([_spectral_derivative_periodic(row) for row in U])
    Dmu = _poly_diff_matrix(mu)
    dU_mu = Dmu @ U
    Z = fiber.nodes.reshape(npol, nb, 3)
    s2 = 1 - mu**2  # sin^2(polar)
    # z(mu, beta) = r (s cos b, s sin b, mu); metric g_mm = r^2/s^2, g_bb = r^2 s^2
    cosb = Z[..., 0] / (r * np.sqrt(s2)[:, None])
    sinb = Z[..., 1] / (r * np.sqrt(s2)[:, None])
    dz_dmu = np.stack(
        [
            -r * mu[:, None] / np.sqrt(s2)[:, None] * cosb,
            -r * mu[:, None] / np.sqrt(s2)[:, None] * sinb,
            r * np.ones_like(cosb),
        ],
        axis=-1,
    )
    dz_db = np.stack(
        [
            -r * np.sqrt(s2)[:, None] * sinb,
            r * np.sqrt(s2)[:, None] * cosb,
            np.zeros_like(cosb),
        ],
        axis=-1,
    )
    grad = (
        (dU_mu / (r * r / s2[:, None]))[..., None] * dz_dmu
        + (dU_beta / (r * r * s2[:, None]))[..., None] * dz_db
    )
    Xv = X.evaluate_many(fiber.nodes).reshape(npol, nb, 3)
    return np.einsum("pba,pba->pb", Xv, grad).reshape(-1)


def _fiber_divergence_values(X: VectorField, fiber, points: np.ndarray) -> np.ndarray:
    """div of the induced field at the given points on the fiber."""
    if isinstance(fiber, SphereFiber):
        # radial case: the Hessian correction vanishes for tangent fields,
        # so the induced divergence equals the ambient one
        div = X.divergence()
        return np.real(div.evaluate_many(points, np.zeros_like(points)))
    if isinstance(fiber, LevelSetModel):
        return np.array(
            [induced_divergence(X, fiber.hamiltonians, z) for z in points]
        )
    raise ValueError("unsupported fiber type")


def _check_tangent(X: VectorField, fiber) -> None:
    Z = np.asarray(fiber.nodes, dtype=float)
    Xv = X.evaluate_many(Z)
    if isinstance(fiber, SphereFiber):
        resid = np.max(np.abs(np.einsum("ia,ia->i", Xv, Z))) / fiber.radius
    else:
        resid = max(
            np.max(
                np.abs(np.einsum("ia,ia->i", Xv, np.array([h.grad(z) for z in Z])))
            )
            for h in fiber.hamiltonians
        )
    if resid > TANGENCY_TOL:
        raise NotTangent(f"field is not tangent to the fiber (residual {resid:.3e})")


def fiber_JX_apply(X: VectorField, hbar: float, u: FiberFunction) -> FiberFunction:
    """-i hbar (X u + (div X^lambda) u / 2) on the fiber."""
    _check_tangent(X, u.fiber)
    Z = np.asarray(u.fiber.nodes, dtype=float)
    div = _fiber_divergence_values(X, u.fiber, Z)
    deriv = _directional_derivative(X, u)
    return FiberFunction(u.fiber, -1j * hbar * (deriv + 0.5 * div * u.values))


def fiber_JX_matrix(X: VectorField, hbar: float, fiber) -> FiberOperator:
    """Dense matrix of fiber_JX_apply (column-by-column on basis vectors)."""
    n = len(fiber.nodes)
    cols = []
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        cols.append(fiber_JX_apply(X, hbar, FiberFunction(fiber, e)).values)
    return FiberOperator(fiber, np.stack(cols, axis=1))


# -- flow propagator ---------------------------------------------------


def evolve_group(
    X: VectorField,
    t: float,
    hbar: float,
    u: FiberFunction,
    steps: int = 1024,
) -> FiberFunction:
    """Unitary flow propagator exp((i t/hbar) JX) in closed form.

    Solves d/dt v = (X + div X^lambda / 2) v along characteristics:
    v(t, z) = exp(int_0^t div X^lambda(Phi_s z) ds / 2) * u(Phi_t z); the
    exponent accumulates the Radon-Nikodym density of the flow pullback.
    hbar cancels in the closed form. Fixed-step RK4 integrates the flow and
    the divergence accumulator jointly.
    """
    fiber = u.fiber
    _check_tangent(X, fiber)
    Z0 = np.asarray(fiber.nodes, dtype=float)

    def rhs(pts):
        vel = X.evaluate_many(pts)
        dacc = _fiber_divergence_values(X, fiber, pts)
        return vel, dacc

    pts = Z0.copy()
    acc = np.zeros(len(pts))
    h = t / steps
    for _ in range(steps):
        k1v, k1a = rhs(pts)
        k2v, k2a = rhs(pts + 0.5 * h * k1v)
        k3v, k3a = rhs(pts + 0.5 * h * k2v)
        k4v, k4a = rhs(pts + h * k3v)
        pts = pts + (h / 6) * (k1v + 2 * k2v + 2 * k3v + k4v)
        acc = acc + (h / 6) * (k1a + 2 * k2a + 2 * k3a + k4a)
    if not np.all(np.isfinite(pts)):
        raise FloatingPointError("flow integration broke down")
    density = np.exp(acc)
    if u.func is not None:
        pulled = np.array([u.func(p) for p in pts], dtype=complex)
    elif isinstance(fiber, SphereFiber) and fiber.ambient_dim == 2:
        pulled = _trig_interpolate(u.values, np.arctan2(pts[:, 1], pts[:, 0]))
    else:
        raise ValueError("need an ambient callable to evaluate along the flow")
    return FiberFunction(fiber, np.sqrt(density) * pulled)


def _trig_interpolate(values: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of uniform-grid data."""
    n = len(values)
    coeffs = np.fft.fft(values) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    return np.asarray(
        [np.sum(coeffs * np.exp(1j * k * a)) for a in angles], dtype=complex
    )
