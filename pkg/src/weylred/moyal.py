"""Exact Moyal star product and Weyl-ordering power expansions.

Everything here is finite and exact: star products of polynomials truncate
once the bidifferential order exceeds the degree of either factor, and the
star-basis expansion is solved by exact Gaussian elimination over Q(i).
No floating point enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from .rational import QQi
from .symbols import PolySymbol, _check_same_dim


class SingularSystemError(ValueError):
    """The star powers are linearly dependent over Q(i)[hbar]."""


def _compositions(total: int, parts: int):
    """All tuples of `parts` non-negative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multi_factorial(alpha: Tuple[int, ...]) -> int:
    out = 1
    for a in alpha:
        f = 1
        for j in range(2, a + 1):
            f *= j
        out *= f
    return out


class _DerivCache:
    """Memoizes iterated partials of one symbol, keyed by (alpha, beta)."""

    def __init__(self, f: PolySymbol, first: str, second: str):
        # first/second name the variable kind for alpha/beta respectively
        self.first = first
        self.second = second
        self.cache = {((0,) * f.dimension, (0,) * f.dimension): f}
        self.n = f.dimension

    def get(self, alpha: Tuple[int, ...], beta: Tuple[int, ...]) -> PolySymbol:
        key = (alpha, beta)
        if key in self.cache:
            return self.cache[key]
        # peel one derivative off and recurse
        for a in range(self.n):
            if alpha[a] > 0:
                down = tuple(v - 1 if j == a else v for j, v in enumerate(alpha))
                base = self.get(down, beta)
                out = base.partial(self.first, a)
                break
        else:
            for a in range(self.n):
                if beta[a] > 0:
                    down = tuple(v - 1 if j == a else v for j, v in enumerate(beta))
                    base = self.get(alpha, down)
                    out = base.partial(self.second, a)
                    break
            else:  # pragma: no cover - zero order handled above
                raise AssertionError
        self.cache[key] = out
        return out


def bidifferential_power(f: PolySymbol, g: PolySymbol, k: int) -> PolySymbol:
    """P^k(f, g); P^0 = fg and P^1 is the Poisson bracket.

    P^k(f,g) = sum_{|alpha|+|beta|=k} k!/(alpha! beta!) (-1)^{|beta|}
               (d_xi^alpha d_x^beta f)(d_x^alpha d_xi^beta g).
    """
    _check_same_dim(f, g)
    if k < 0:
        raise ValueError("bidifferential order must be non-negative")
    n = f.dimension
    if k == 0:
        return f * g
    if k > min(f.total_degree(), g.total_degree()):
        return PolySymbol.zero(n)
    df = _DerivCache(f, "xi", "x")
    dg = _DerivCache(g, "x", "xi")
    k_fact = 1
    for j in range(2, k + 1):
        k_fact *= j
    out = PolySymbol.zero(n)
    for combined in _compositions(k, 2 * n):
        alpha = combined[:n]
        beta = combined[n:]
        left = df.get(alpha, beta)
        if left.is_zero():
            continue
        right = dg.get(alpha, beta)
        if right.is_zero():
            continue
        coeff = Fraction(k_fact, _multi_factorial(alpha) * _multi_factorial(beta))
        if sum(beta) % 2:
            coeff = -coeff
        out = out + coeff * (left * right)
    return out


def moyal_star(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """f * g = sum_k (1/k!) (i/2)^k hbar^k P^k(f, g), a finite exact sum."""
    _check_same_dim(f, g)
    n = f.dimension
    kmax = min(f.total_degree(), g.total_degree())
    out = PolySymbol.zero(n)
    half_i = QQi(Fraction(0), Fraction(1, 2))
    coeff = QQi.coerce(1)  # (i/2)^k / k!
    for k in range(kmax + 1):
        if k > 0:
            coeff = coeff * half_i / k
        pk = bidifferential_power(f, g, k)
        if pk.is_zero():
            continue
        out = out + PolySymbol.hbar(n, k) * (coeff * pk)
    return out


def star_commutator(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """f * g - g * f; leading term is i hbar {f, g}."""
    return moyal_star(f, g) - moyal_star(g, f)


def star_power(f: PolySymbol, m: int) -> PolySymbol:
    if m < 0:
        raise ValueError("negative star powers are not defined here")
    out = PolySymbol.one(f.dimension)
    for _ in range(m):
        out = moyal_star(out, f)
    return out


def quadratic_exactness_check(h: PolySymbol, g: PolySymbol) -> PolySymbol:
    """Residual star_commutator(h,g) - i hbar {h,g}; zero for quadratic h.

    For h of combined degree <= 2, all third partials of h vanish, so the
    star commutator truncates at first order in the P-series.
    """
    _check_same_dim(h, g)
    if h.total_degree() > 2:
        raise ValueError("quadratic_exactness_check requires deg(h) <= 2")
    n = h.dimension
    bracket_term = PolySymbol.hbar(n) * (QQi.i() * h.poisson(g))
    return star_commutator(h, g) - bracket_term


@dataclass(frozen=True)
class StarExpansion:
    """f^m written in the star-power basis: f^m = sum_j c_j(hbar) f^{*j}.

    Each coefficient is a PolySymbol in hbar only; the top one is 1.
    """

    base_symbol: PolySymbol
    degree: int
    coefficients: List[Tuple[int, PolySymbol]]
    star_powers: List[PolySymbol]

    def reconstruct(self) -> PolySymbol:
        out = PolySymbol.zero(self.base_symbol.dimension)
        for j, c in self.coefficients:
            out = out + c * self.star_powers[j]
        return out

    def residual(self) -> PolySymbol:
        return self.reconstruct() - self.base_symbol**self.degree


def _solve_exact(rows: List[List[QQi]], rhs: List[QQi]) -> List[QQi]:
    """Solve a (possibly overdetermined) exact linear system uniquely.

    Raises SingularSystemError when the columns are dependent or the system
    is inconsistent.
    """
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivot_row_of_col: dict[int, int] = {}
    r = 0
    for c in range(n_cols):
        pivot = None
        for rr in range(r, n_rows):
            if not aug[rr][c].is_zero():
                pivot = rr
                break
        if pivot is None:
            raise SingularSystemError(
                "star powers are linearly dependent over Q(i)[hbar]"
            )
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for rr in range(n_rows):
            if rr != r and not aug[rr][c].is_zero():
                factor = aug[rr][c]
                aug[rr] = [v - factor * w for v, w in zip(aug[rr], aug[r])]
        pivot_row_of_col[c] = r
        r += 1
    for rr in range(r, n_rows):
        if not aug[rr][n_cols].is_zero():
            raise SingularSystemError("inconsistent star-basis system")
    return [aug[pivot_row_of_col[c]][n_cols] for c in range(n_cols)]


def expand_power_in_star_basis(f: PolySymbol, m: int) -> StarExpansion:
    """Express the pointwise power f^m in the basis {hbar^d f^{*j}}.

    Requires f free of hbar. Solves the exact linear system matching every
    monomial of f^m against the star powers f^{*0}..f^{*m}.
    """
    if m < 1:
        raise ValueError("power must be a positive integer")
    if not f.is_hbar_free():
        raise ValueError("base symbol must be hbar-free")
    n = f.dimension
    powers = [PolySymbol.one(n)]
    for _ in range(m):
        powers.append(moyal_star(powers[-1], f))
    target = f**m
    dmax = max(p.hbar_degree() for p in powers)

    # unknowns: c_{j,d} with f^m = sum_{j,d} c_{j,d} hbar^d f^{*j}
    unknowns = [(j, d) for j in range(m + 1) for d in range(dmax + 1)]
    shifted = {
        (j, d): PolySymbol.hbar(n, d) * powers[j] for (j, d) in unknowns
    }
    keys = set(target.terms)
    for p in shifted.values():
        keys |= set(p.terms)
    ordered_keys = sorted(keys)
    rows = [
        [shifted[u].coefficient(key) for u in unknowns] for key in ordered_keys
    ]
    rhs = [target.coefficient(key) for key in ordered_keys]
    solution = _solve_exact(rows, rhs)

    coeff_polys: dict[int, PolySymbol] = {}
    for (j, d), c in zip(unknowns, solution):
        if c.is_zero():
            continue
        coeff_polys[j] = coeff_polys.get(j, PolySymbol.zero(n)) + PolySymbol.hbar(n, d) * c
    coefficients = sorted(coeff_polys.items())
    return StarExpansion(
        base_symbol=f, degree=m, coefficients=coefficients, star_powers=powers
    )
