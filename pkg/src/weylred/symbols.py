"""Exact phase-space polynomials in (x, xi) with a formal hbar grading.

Coefficients live in Q(i) so that star products of real symbols stay exact.
Terms are keyed by (hbar_power, x_exponents, xi_exponents); zero coefficients
are never stored, which makes dict equality a canonical-form equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Tuple

import numpy as np

from .rational import QQi, parse_rational

TermKey = Tuple[int, Tuple[int, ...], Tuple[int, ...]]


class DimensionMismatch(ValueError):
    pass


def _check_same_dim(f: "PolySymbol", g: "PolySymbol"):
    if f.dimension != g.dimension:
        raise DimensionMismatch(
            f"dimension mismatch: {f.dimension} vs {g.dimension}"
        )


class PolySymbol:
    """Polynomial in x_0..x_{n-1}, xi_0..xi_{n-1} and hbar over Q(i).

    Immutable; all arithmetic returns new instances in canonical form.
    """

    __slots__ = ("dimension", "terms")

    def __init__(self, dimension: int, terms: Mapping[TermKey, QQi] | None = None):
        if dimension < 1:
            raise ValueError("dimension must be a positive integer")
        clean: dict[TermKey, QQi] = {}
        for (h, xe, xie), c in (terms or {}).items():
            xe = tuple(int(e) for e in xe)
            xie = tuple(int(e) for e in xie)
            if h < 0 or any(e < 0 for e in xe) or any(e < 0 for e in xie):
                raise ValueError("exponents must be non-negative")
            if len(xe) != dimension or len(xie) != dimension:
                raise DimensionMismatch("exponent vector length != dimension")
            c = QQi.coerce(c)
            if c.is_zero():
                continue
            key = (int(h), xe, xie)
            prev = clean.get(key)
            total = c if prev is None else prev + c
            if total.is_zero():
                clean.pop(key, None)
            else:
                clean[key] = total
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # immutability guard
        raise AttributeError("PolySymbol is immutable")

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "PolySymbol":
        return cls(n)

    @classmethod
    def constant(cls, c, n: int) -> "PolySymbol":
        z = (0,) * n
        return cls(n, {(0, z, z): QQi.coerce(c)})

    @classmethod
    def one(cls, n: int) -> "PolySymbol":
        return cls.constant(1, n)

    @classmethod
    def x(cls, a: int, n: int) -> "PolySymbol":
        if not 0 <= a < n:
            raise IndexError(f"x index {a} out of range for dimension {n}")
        xe = tuple(1 if j == a else 0 for j in range(n))
        return cls(n, {(0, xe, (0,) * n): QQi.coerce(1)})

    @classmethod
    def xi(cls, a: int, n: int) -> "PolySymbol":
        if not 0 <= a < n:
            raise IndexError(f"xi index {a} out of range for dimension {n}")
        xie = tuple(1 if j == a else 0 for j in range(n))
        return cls(n, {(0, (0,) * n, xie): QQi.coerce(1)})

    @classmethod
    def hbar(cls, n: int, power: int = 1) -> "PolySymbol":
        z = (0,) * n
        return cls(n, {(power, z, z): QQi.coerce(1)})

    # -- ring operations ------------------------------------------------
    def __add__(self, other) -> "PolySymbol":
        other = self._coerce(other)
        _check_same_dim(self, other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            prev = terms.get(k)
            total = c if prev is None else prev + c
            if total.is_zero():
                terms.pop(k, None)
            else:
                terms[k] = total
        return PolySymbol(self.dimension, terms)

    __radd__ = __add__

    def __neg__(self) -> "PolySymbol":
        return PolySymbol(self.dimension, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "PolySymbol":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PolySymbol":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "PolySymbol":
        if isinstance(other, (int, Fraction, QQi)):
            c = QQi.coerce(other)
            return PolySymbol(
                self.dimension, {k: v * c for k, v in self.terms.items()}
            )
        other = self._coerce(other)
        _check_same_dim(self, other)
        out: dict[TermKey, QQi] = {}
        for (h1, xe1, xie1), c1 in self.terms.items():
            for (h2, xe2, xie2), c2 in other.terms.items():
                key = (
                    h1 + h2,
                    tuple(a + b for a, b in zip(xe1, xe2)),
                    tuple(a + b for a, b in zip(xie1, xie2)),
                )
                prev = out.get(key)
                total = c1 * c2 if prev is None else prev + c1 * c2
                if total.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = total
        return PolySymbol(self.dimension, out)

    __rmul__ = __mul__

    def __pow__(self, m: int) -> "PolySymbol":
        if m < 0:
            raise ValueError("negative powers are not polynomial")
        out = PolySymbol.one(self.dimension)
        for _ in range(m):
            out = out * self
        return out

    def _coerce(self, other) -> "PolySymbol":
        if isinstance(other, PolySymbol):
            return other
        if isinstance(other, (int, Fraction, QQi)):
            return PolySymbol.constant(other, self.dimension)
        raise TypeError(f"cannot combine PolySymbol with {type(other)}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolySymbol):
            return NotImplemented
        return self.dimension == other.dimension and self.terms == other.terms

    def __hash__(self):
        return hash((self.dimension, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    # -- calculus -------------------------------------------------------
    def partial(self, kind: str, a: int) -> "PolySymbol":
        """Formal partial derivative; kind is 'x' or 'xi'."""
        if kind not in ("x", "xi"):
            raise ValueError("kind must be 'x' or 'xi'")
        if not 0 <= a < self.dimension:
            raise IndexError(f"variable index {a} out of range")
        pos = 1 if kind == "x" else 2
        out: dict[TermKey, QQi] = {}
        for key, c in self.terms.items():
            exps = key[pos]
            e = exps[a]
            if e == 0:
                continue
            new_exps = tuple(v - 1 if j == a else v for j, v in enumerate(exps))
            new_key = list(key)
            new_key[pos] = new_exps
            out[tuple(new_key)] = c * e  # type: ignore[index]
        return PolySymbol(self.dimension, out)

    def poisson(self, other: "PolySymbol") -> "PolySymbol":
        """{f,g} = sum_a (d_xi_a f d_x_a g - d_x_a f d_xi_a g).

        The sign is fixed so that {J_X, J_Y} = J_[X,Y] with the standard
        Lie bracket of vector fields.
        """
        other = self._coerce(other)
        _check_same_dim(self, other)
        out = PolySymbol.zero(self.dimension)
        for a in range(self.dimension):
            out = out + self.partial("xi", a) * other.partial("x", a)
            out = out - self.partial("x", a) * other.partial("xi", a)
        return out

    # -- queries --------------------------------------------------------
    def total_degree(self) -> int:
        """Max combined degree in (x, xi); hbar does not count."""
        if not self.terms:
            return 0
        return max(sum(xe) + sum(xie) for _, xe, xie in self.terms)

    def xi_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(xie) for _, _, xie in self.terms)

    def hbar_degree(self) -> int:
        if not self.terms:
            return 0
        return max(h for h, _, _ in self.terms)

    def is_xi_free(self) -> bool:
        return all(sum(xie) == 0 for _, _, xie in self.terms)

    def is_hbar_free(self) -> bool:
        return all(h == 0 for h, _, _ in self.terms)

    def coefficient(self, key: TermKey) -> QQi:
        return self.terms.get(key, QQi())

    def hbar_component(self, power: int) -> "PolySymbol":
        """The hbar^power slice, with the hbar factor stripped."""
        return PolySymbol(
            self.dimension,
            {
                (0, xe, xie): c
                for (h, xe, xie), c in self.terms.items()
                if h == power
            },
        )

    def substitute_hbar_sign(self) -> "PolySymbol":
        """hbar -> -hbar."""
        return PolySymbol(
            self.dimension,
            {k: (-c if k[0] % 2 else c) for k, c in self.terms.items()},
        )

    def evaluate(self, x: Sequence[float], xi: Sequence[float], hbar: float = 1.0) -> complex:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if x.shape[-1] != self.dimension or xi.shape[-1] != self.dimension:
            raise DimensionMismatch("point dimension does not match symbol")
        total = 0.0 + 0.0j
        for (h, xe, xie), c in self.terms.items():
            mono = hbar**h
            for a in range(self.dimension):
                if xe[a]:
                    mono = mono * x[a] ** xe[a]
                if xie[a]:
                    mono = mono * xi[a] ** xie[a]
            total += complex(c) * mono
        return total

    def evaluate_many(self, xs: np.ndarray, xis: np.ndarray, hbar: float = 1.0) -> np.ndarray:
        """Vectorized evaluate over arrays of shape (N, n)."""
        xs = np.asarray(xs, dtype=float)
        xis = np.asarray(xis, dtype=float)
        total = np.zeros(xs.shape[0], dtype=complex)
        for (h, xe, xie), c in self.terms.items():
            mono = np.full(xs.shape[0], hbar**h, dtype=float)
            for a in range(self.dimension):
                if xe[a]:
                    mono = mono * xs[:, a] ** xe[a]
                if xie[a]:
                    mono = mono * xis[:, a] ** xie[a]
            total += complex(c) * mono
        return total

    def __repr__(self):
        if not self.terms:
            return "PolySymbol(0)"
        parts = []
        for (h, xe, xie), c in sorted(self.terms.items()):
            factors = [f"({c})"]
            if h:
                factors.append(f"hb^{h}")
            factors += [f"x{a}^{e}" for a, e in enumerate(xe) if e]
            factors += [f"xi{a}^{e}" for a, e in enumerate(xie) if e]
            parts.append("*".join(factors))
        return " + ".join(parts)


@dataclass(frozen=True)
class VectorField:
    """n polynomial component functions on R^n (position-only symbols)."""

    dimension: int
    components: Tuple[PolySymbol, ...]

    def __post_init__(self):
        if len(self.components) != self.dimension:
            raise DimensionMismatch("need one component per dimension")
        for comp in self.components:
            if comp.dimension != self.dimension:
                raise DimensionMismatch("component dimension mismatch")
            if not comp.is_xi_free() or not comp.is_hbar_free():
                raise ValueError("vector field components must be xi- and hbar-free")

    @classmethod
    def from_symbols(cls, components: Iterable[PolySymbol]) -> "VectorField":
        comps = tuple(components)
        return cls(comps[0].dimension, comps)

    @classmethod
    def zero(cls, n: int) -> "VectorField":
        return cls(n, tuple(PolySymbol.zero(n) for _ in range(n)))

    def divergence(self) -> PolySymbol:
        out = PolySymbol.zero(self.dimension)
        for a, comp in enumerate(self.components):
            out = out + comp.partial("x", a)
        return out

    def apply_to(self, a: PolySymbol) -> PolySymbol:
        """Directional derivative X(a) = sum_b X_b d_x_b a."""
        out = PolySymbol.zero(self.dimension)
        for b, comp in enumerate(self.components):
            out = out + comp * a.partial("x", b)
        return out

    def lie_bracket(self, other: "VectorField") -> "VectorField":
        """[X,Y]_a = X(Y_a) - Y(X_a)."""
        comps = tuple(
            self.apply_to(yb) - other.apply_to(xb)
            for xb, yb in zip(self.components, other.components)
        )
        return VectorField(self.dimension, comps)

    def evaluate(self, x: Sequence[float]) -> np.ndarray:
        zero = np.zeros(self.dimension)
        return np.array(
            [comp.evaluate(x, zero).real for comp in self.components]
        )

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        zeros = np.zeros_like(xs)
        return np.stack(
            [comp.evaluate_many(xs, zeros).real for comp in self.components],
            axis=1,
        )


def momentum_symbol(X: VectorField) -> PolySymbol:
    """J_X(x, xi) = <X(x), xi>; degree 1 in xi unless X = 0."""
    n = X.dimension
    out = PolySymbol.zero(n)
    for a, comp in enumerate(X.components):
        out = out + comp * PolySymbol.xi(a, n)
    return out


def angular_momentum(i: int, j: int, n: int) -> PolySymbol:
    """f_ij = x_i xi_j - x_j xi_i (indices 0-based)."""
    if i == j:
        raise ValueError("angular momentum needs two distinct indices")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError("angular momentum index out of range")
    return PolySymbol.x(i, n) * PolySymbol.xi(j, n) - PolySymbol.x(j, n) * PolySymbol.xi(i, n)


def rotation_generator(i: int, j: int, n: int) -> VectorField:
    """The vector field x_i d_j - x_j d_i, whose momentum symbol is f_ij."""
    comps = []
    for b in range(n):
        if b == j:
            comps.append(PolySymbol.x(i, n))
        elif b == i:
            comps.append(-PolySymbol.x(j, n))
        else:
            comps.append(PolySymbol.zero(n))
    return VectorField(n, tuple(comps))


def xi_norm_squared(n: int) -> PolySymbol:
    out = PolySymbol.zero(n)
    for a in range(n):
        out = out + PolySymbol.xi(a, n) * PolySymbol.xi(a, n)
    return out


# -- polynomial literal format for config files ------------------------


def symbol_from_literal(records, n: int) -> PolySymbol:
    """Parse [{"re": "p/q", "im": "p/q", "hbar": k, "x": [...], "xi": [...]}].

    Missing "im"/"hbar" default to zero; "x"/"xi" must be length-n lists of
    non-negative integers.
    """
    if not isinstance(records, list):
        raise ValueError("polynomial literal must be a list of term records")
    terms: dict[TermKey, QQi] = {}
    for rec in records:
        if not isinstance(rec, dict):
            raise ValueError(f"term record must be an object, got {rec!r}")
        unknown = set(rec) - {"re", "im", "hbar", "x", "xi"}
        if unknown:
            raise ValueError(f"unknown term record keys: {sorted(unknown)}")
        re = parse_rational(rec.get("re", "0"))
        im = parse_rational(rec.get("im", "0"))
        h = rec.get("hbar", 0)
        if not isinstance(h, int) or h < 0:
            raise ValueError(f"hbar power must be a non-negative integer, got {h!r}")
        xe = rec.get("x", [0] * n)
        xie = rec.get("xi", [0] * n)
        for exps, label in ((xe, "x"), (xie, "xi")):
            if (
                not isinstance(exps, list)
                or len(exps) != n
                or any(not isinstance(e, int) or e < 0 for e in exps)
            ):
                raise ValueError(
                    f"{label} exponents must be a length-{n} list of non-negative integers"
                )
        key = (h, tuple(xe), tuple(xie))
        c = QQi(re, im)
        terms[key] = terms.get(key, QQi()) + c
    return PolySymbol(n, terms)


def symbol_to_literal(f: PolySymbol):
    records = []
    for (h, xe, xie), c in sorted(f.terms.items()):
        records.append(
            {
                "re": str(c.re),
                "im": str(c.im),
                "hbar": h,
                "x": list(xe),
                "xi": list(xie),
            }
        )
    return records
