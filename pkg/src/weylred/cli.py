"""Command-line verification harness.

    weylred <subcommand> --config <path> [--out <dir>] [--format json,csv] [--jobs N]

Subcommands: identities | coarea | unitarity | commutation | evolve |
kernel | sweep | all. Exit codes: 0 all checks pass, 1 check failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import random
import sys
import time
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .config import ConfigError, SuiteConfig, parse_config
from .dint import (
    apply_Tx,
    apply_Txi,
    build_grid,
    coarea_check,
    gaussian_poly_suite,
    strong_commutation_check,
)
from .fiber import (
    FiberFunction,
    PWSymbol,
    SphereFiber,
    evolve_group,
    fiber_JX_matrix,
    kernel_quantize,
    stereo_charts,
)
from .geometry import ScalarHamiltonian, TestFunction
from .moyal import expand_power_in_star_basis, star_commutator
from .report import CheckRecord, Report, emit_report
from .sweep import bump_profile, default_sweep_pair, semiclassical_sweep
from .symbols import (
    PolySymbol,
    angular_momentum,
    momentum_symbol,
    rotation_generator,
    xi_norm_squared,
)

SUBCOMMANDS = (
    "identities",
    "coarea",
    "unitarity",
    "commutation",
    "evolve",
    "kernel",
    "sweep",
    "all",
)


def _timed(report: Report, name: str, params: dict, tolerance, fn: Callable) -> None:
    """Run one check; module errors become failed records, not crashes."""
    t0 = time.perf_counter()
    try:
        residual, exact, passed = fn()
    except Exception as exc:  # deliberate: the suite must survive any check
        report.add(
            CheckRecord(
                name=name,
                params={**params, "error": f"{type(exc).__name__}: {exc}"},
                tolerance=tolerance,
                passed=False,
                wall_time_s=time.perf_counter() - t0,
            )
        )
        return
    report.add(
        CheckRecord(
            name=name,
            params=params,
            tolerance=tolerance,
            passed=bool(passed),
            residual=None if residual is None else float(residual),
            exact=None if exact is None else bool(exact),
            wall_time_s=time.perf_counter() - t0,
        )
    )


# -- individual suites --------------------------------------------------


def _run_identities(cfg: SuiteConfig, report: Report) -> None:
    from fractions import Fraction

    expected = {
        2: {2: PolySymbol.one, 0: lambda n: PolySymbol.hbar(n, 2) * Fraction(1, 2)},
        3: {3: PolySymbol.one, 1: lambda n: PolySymbol.hbar(n, 2) * 2},
        4: {
            4: PolySymbol.one,
            2: lambda n: PolySymbol.hbar(n, 2) * 5,
            0: lambda n: PolySymbol.hbar(n, 4) * Fraction(3, 2),
        },
    }
    for n in (2, 3):
        for i in range(n):
            for j in range(i + 1, n):
                fij = angular_momentum(i, j, n)
                for m, coeffs in expected.items():

                    def check(fij=fij, m=m, coeffs=coeffs, n=n):
                        exp = expand_power_in_star_basis(fij, m)
                        got = dict(exp.coefficients)
                        ok = set(got) == set(coeffs) and all(
                            got[k] == coeffs[k](n) for k in coeffs
                        )
                        ok = ok and exp.residual().is_zero()
                        return None, ok, ok

                    _timed(
                        report,
                        f"star-expansion-n{n}-f{i+1}{j+1}-m{m}",
                        {"n": n, "pair": [i + 1, j + 1], "power": m},
                        None,
                        check,
                    )

                def comm(fij=fij, n=n):
                    ok = all(
                        star_commutator(xi_norm_squared(n), fij**m).is_zero()
                        for m in range(1, 5)
                    )
                    return None, ok, ok

                _timed(
                    report,
                    f"laplacian-commutation-n{n}-f{i+1}{j+1}",
                    {"n": n, "pair": [i + 1, j + 1], "powers": [1, 2, 3, 4]},
                    None,
                    comm,
                )

    def table_row_check():
        rng = random.Random(cfg.seed)
        ok = True
        for _ in range(10):
            X = _random_field(rng, 3, 3)
            Y = _random_field(rng, 3, 3)
            lhs = momentum_symbol(X).poisson(momentum_symbol(Y))
            ok = ok and lhs == momentum_symbol(X.lie_bracket(Y))
            q = star_commutator(momentum_symbol(X), momentum_symbol(Y))
            from .rational import QQi

            ok = ok and q == PolySymbol.hbar(3) * (
                QQi.i() * momentum_symbol(X.lie_bracket(Y))
            )
        return None, ok, ok

    _timed(
        report,
        "momentum-bracket-table",
        {"pairs": 10, "seed": cfg.seed},
        None,
        table_row_check,
    )


def _random_field(rng: random.Random, n: int, degree: int):
    from fractions import Fraction

    from .rational import QQi
    from .symbols import VectorField

    def poly():
        terms = {}
        for _ in range(rng.randint(1, 4)):
            d = rng.randint(0, degree)
            xe = [0] * n
            for _ in range(d):
                xe[rng.randrange(n)] += 1
            c = rng.randint(-3, 3) or 1
            key = (0, tuple(xe), (0,) * n)
            terms[key] = terms.get(key, QQi()) + QQi(Fraction(c))
        return PolySymbol(n, terms)

    return VectorField(n, tuple(poly() for _ in range(n)))


def _run_coarea(cfg: SuiteConfig, report: Report) -> None:
    from .config import _half_square

    # fixed oracle geometry: disc levels of |x|^2/2 in the plane
    ham = ScalarHamiltonian(_half_square(2))
    suite = gaussian_poly_suite(2)
    f = suite[2]  # exp(-|x|^2)
    kind = "circle"
    lam_lo, lam_hi = 5e-9, 18.0

    def residual_at(nl, nf):
        grid = build_grid(ham, kind, lam_lo, lam_hi, nl, nf)
        return coarea_check(f, grid)

    def main_check():
        res = residual_at(max(cfg.n_lambda, 200), max(cfg.fiber_nodes, 256))
        return res, None, res < 1e-8

    _timed(
        report,
        "coarea-gaussian",
        {"hamiltonian": "half-square-norm", "target": "pi^{3/2}/2"},
        1e-8,
        main_check,
    )

    def ladder():
        resids = [residual_at(nl, nf) for nl, nf in ((3, 8), (6, 16), (12, 32), (24, 64))]
        ok = all(a > b for a, b in zip(resids, resids[1:]))
        return resids[-1], None, ok

    _timed(
        report,
        "coarea-refinement-monotone",
        {"ladder": [[3, 8], [6, 16], [12, 32], [24, 64]]},
        None,
        ladder,
    )


def _run_unitarity(cfg: SuiteConfig, report: Report) -> None:
    from .config import _half_square

    n = cfg.dimension
    # radial levels of |x|^2/2: the only geometry with analytic norms to
    # compare against, independent of the configured hamiltonian
    ham = ScalarHamiltonian(_half_square(n))
    kind = "circle" if n == 2 else "sphere2"
    grid = build_grid(
        ham,
        kind,
        5e-9,
        18.0,
        max(cfg.n_lambda, 200),
        cfg.fiber_nodes,
        n_polar=cfg.n_polar,
        n_azimuth=cfg.n_azimuth,
    )
    suite = gaussian_poly_suite(n)
    for idx in cfg.test_functions:
        u = suite[idx]

        def check(u=u):
            s = apply_Tx(u, grid)
            res = abs(s.norm() ** 2 - u.analytic_l2_norm**2)
            return res, None, res < cfg.tolerance

        _timed(
            report,
            f"unitarity-Tx-{u.name}",
            {"n": n, "function": u.name},
            cfg.tolerance,
            check,
        )

        def check_xi(u=u):
            s = apply_Txi(u, grid)
            res = abs(s.norm() ** 2 - u.analytic_l2_norm**2)
            return res, None, res < cfg.tolerance

        _timed(
            report,
            f"unitarity-Txi-{u.name}",
            {"n": n, "function": u.name},
            cfg.tolerance,
            check_xi,
        )

    def intertwining():
        def sq(p):
            return np.sum(np.asarray(p) ** 2, axis=-1)

        u = suite[0]
        small = build_grid(ham, kind, 0.5, 2.0, 8, 32,
                           n_polar=cfg.n_polar, n_azimuth=cfg.n_azimuth)
        phiu = TestFunction(
            value=lambda p: 0.5 * sq(p) * np.exp(-0.5 * sq(p)), gradient=None
        )
        lhs = apply_Tx(phiu, small)
        base = apply_Tx(u, small)
        res = max(
            float(np.max(np.abs(a - lam * b)))
            for lam, a, b in zip(small.lambda_nodes, lhs.parts, base.parts)
        )
        return res, res < 1e-12, res < 1e-12

    _timed(
        report,
        "multiplication-intertwining",
        {"n": n},
        1e-12,
        intertwining,
    )

    def laplace_intertwining():
        def sq(p):
            return np.sum(np.asarray(p) ** 2, axis=-1)

        u = suite[0]
        small = build_grid(ham, kind, 0.5, 2.0, 8, 32,
                           n_polar=cfg.n_polar, n_azimuth=cfg.n_azimuth)
        lap = TestFunction(
            value=u.value,
            gradient=None,
            fourier=lambda p: 0.5 * sq(p) * np.exp(-0.5 * sq(p)),
        )
        lhs = apply_Txi(lap, small)
        base = apply_Txi(u, small)
        res = max(
            float(np.max(np.abs(a - lam * b)))
            for lam, a, b in zip(small.lambda_nodes, lhs.parts, base.parts)
        )
        return res, res < 1e-12, res < 1e-12

    _timed(
        report,
        "momentum-laplacian-intertwining",
        {"n": n},
        1e-12,
        laplace_intertwining,
    )


def _run_commutation(cfg: SuiteConfig, report: Report) -> None:
    n = cfg.dimension
    grid = build_grid(
        cfg.hamiltonian,
        cfg.fiber_kind,
        max(cfg.lambda_range[0], 1e-6),
        cfg.lambda_range[1],
        min(cfg.n_lambda, 16),
        cfg.fiber_nodes,
        n_polar=cfg.n_polar,
        n_azimuth=cfg.n_azimuth,
    )
    suite = gaussian_poly_suite(n)

    def check():
        res = strong_commutation_check(cfg.vector_field, suite[3], cfg.hbar_list[0], grid)
        return res, None, res < cfg.tolerance

    _timed(
        report,
        "strong-commutation",
        {
            "n": n,
            "fiber_kind": cfg.fiber_kind,
            "hbar": cfg.hbar_list[0],
            "function": suite[3].name,
        },
        cfg.tolerance,
        check,
    )


def _run_evolve(cfg: SuiteConfig, report: Report) -> None:
    fiber = SphereFiber.circle(1.0, 256)
    X = rotation_generator(0, 1, 2)
    u = FiberFunction(fiber, np.exp(np.sin(fiber.thetas)) + 0j)
    for hbar in (1.0, 0.1):

        def vs_expm(hbar=hbar):
            G = fiber_JX_matrix(X, hbar, fiber).matrix
            t = 2 * math.pi
            P = expm((1j * t / hbar) * G)
            direct = evolve_group(X, t, hbar, u)
            res = float(np.max(np.abs(P @ u.values - direct.values)))
            return res, None, res < 1e-6

        _timed(
            report,
            f"propagator-vs-expm-hbar-{hbar}",
            {"nodes": 256, "t": "2*pi", "hbar": hbar},
            1e-6,
            vs_expm,
        )

    def full_period():
        out = evolve_group(X, 2 * math.pi, 1.0, u)
        res = float(np.max(np.abs(out.values - u.values)))
        return res, None, res < 1e-8

    _timed(report, "propagator-full-period", {"nodes": 256}, 1e-8, full_period)


def _run_kernel(cfg: SuiteConfig, report: Report) -> None:
    fiber = SphereFiber.circle(1.0, 96)
    b = bump_profile(4.0)

    def fhat(m, v):
        a = 1.0 + 0.5 * np.asarray(m)[..., 0]
        return a * b(np.linalg.norm(v, axis=-1))

    sym = PWSymbol(fhat=fhat, support_radius=4.0)

    def hermitian():
        K = kernel_quantize(sym, 0.3, fiber).kernel_matrix()
        res = float(np.max(np.abs(K - K.conj().T)))
        return res, None, res < 1e-10

    _timed(report, "kernel-hermitian", {"nodes": 96, "hbar": 0.3}, 1e-10, hermitian)

    def antipodal():
        K = kernel_quantize(sym, 1.0, fiber).kernel_matrix()
        res = float(max(abs(K[i, (i + 48) % 96]) for i in range(96)))
        return res, res == 0.0, res == 0.0

    _timed(report, "kernel-antipodal-zeros", {"nodes": 96}, None, antipodal)

    def density_decision():
        total = 0.0
        for r in (1.0, 1.9):
            _, _, density = stereo_charts(np.array([r, 0.0]), r)
            val, _ = quad(lambda t: density([t]), -np.inf, np.inf)
            total = max(total, abs(val - 2 * math.pi * r))
        return total, None, total < 1e-8

    _timed(
        report,
        "metric-density-exponent",
        {
            "decided": "(2*lam/(lam+|z|^2))^(n-1)",
            "rejected_variant": "(2*lam/(lam+|z|^2)^2)^(n-1)",
            "oracle": "chart circumference equals 2*pi*r",
        },
        1e-8,
        density_decision,
    )


def _run_sweep(cfg: SuiteConfig, report: Report) -> None:
    f, g = default_sweep_pair()
    fiber = SphereFiber.circle(1.0, 384)

    def check():
        rows = semiclassical_sweep(f, g, list(cfg.hbar_list), fiber)
        ok = True
        for key in ("product", "jordan", "commutator"):
            seq = [r[key] for r in rows]
            ok = ok and all(a > b for a, b in zip(seq, seq[1:]))
        return rows[-1]["product"], None, ok

    _timed(
        report,
        "semiclassical-sweep-monotone",
        {"hbar": list(cfg.hbar_list), "nodes": 384},
        None,
        check,
    )


_RUNNERS = {
    "identities": _run_identities,
    "coarea": _run_coarea,
    "unitarity": _run_unitarity,
    "commutation": _run_commutation,
    "evolve": _run_evolve,
    "kernel": _run_kernel,
    "sweep": _run_sweep,
}


def run_suite(cfg: SuiteConfig, which: str) -> Report:
    report = Report(suite=which)
    names = list(_RUNNERS) if which == "all" else [which]
    for name in names:
        _RUNNERS[name](cfg, report)
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="weylred", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="JSON config path (defaults apply if omitted)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--format", default="json", help="comma list: json,csv")
    parser.add_argument(
        "--jobs",
        type=int,
        default=int(os.environ.get("WEYLRED_JOBS", "1")),
        help="worker count (checks currently run sequentially for determinism)",
    )
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else SuiteConfig()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    formats = tuple(s.strip() for s in args.format.split(",") if s.strip())
    if any(f not in ("json", "csv") for f in formats):
        print(f"config error: unknown format in {args.format!r}", file=sys.stderr)
        return 2
    report = run_suite(cfg, args.subcommand)
    out_dir = args.out or cfg.out_dir
    paths = emit_report(report, out_dir, formats)
    for rec in report.records:
        status = "PASS" if rec.passed else "FAIL"
        resid = "exact" if rec.residual is None else f"{rec.residual:.3e}"
        print(f"[{status}] {rec.name}: {resid}")
    print(f"report: {', '.join(str(p) for p in paths)}")
    return 0 if report.verdict else 1


if __name__ == "__main__":
    sys.exit(main())
