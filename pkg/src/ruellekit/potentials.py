"""Potentials with regularity metadata and certified evaluation.

A potential is a real function on the shift space together with a
declaration of how fast it forgets remote coordinates.  Every evaluation
returns a pair (value, error_bound): the bound is a certified absolute
error (0.0 when the value is exact, as for finite-depth tables).

Regularity metadata drives the variation estimates:

* LocallyConstant(m): depends on the first m coordinates only, so
  var_n = 0 for n >= m and all variation quantities are computed exactly
  from the table.
* Hoelder(gamma, constant): var_n <= constant * 2**(-gamma*n).
* SummableVariation(var_bound): an explicit upper-bound sequence.
* GenericContinuous: no quantitative information; variation queries are
  refused rather than silently under-estimated.

var_n(f) is the oscillation sup{|f(x)-f(y)| : x_i = y_i for i <= n}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .shift import (
    CylinderFunction,
    Point,
    check_table_size,
    shift,
    word_table,
)


# ---------------------------------------------------------------------------
# Regularity metadata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocallyConstant:
    depth: int


@dataclass(frozen=True)
class Hoelder:
    gamma: float
    constant: float

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.constant < 0:
            raise ValueError("constant must be >= 0")


@dataclass(frozen=True)
class SummableVariation:
    """var_n(f) <= var_bound(n) with sum var_bound(n) < infinity."""

    var_bound: Callable[[int], float]


@dataclass(frozen=True)
class GenericContinuous:
    pass


class VariationUnavailable(ValueError):
    """Raised when no certified variation bound can be produced."""


# ---------------------------------------------------------------------------
# Potential
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """A potential: certified evaluator + regularity metadata.

    `table` is set for locally-constant potentials and is the exact value
    table at `regularity.depth`; the fast vectorised paths in the transfer
    and kernel modules key off it.
    """

    d: int
    regularity: object
    fn: Callable[[Point], tuple[float, float]] = field(repr=False)
    table: CylinderFunction | None = field(default=None, repr=False)
    label: str = ""

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_table(cls, d: int, depth: int, values, label: str = "") -> "Potential":
        tab = CylinderFunction(d, depth, values)

        def fn(x: Point) -> tuple[float, float]:
            return tab.value_at(x), 0.0

        return cls(d, LocallyConstant(depth), fn, tab, label)

    @classmethod
    def constant(cls, d: int, c: float, label: str = "") -> "Potential":
        return cls.from_table(d, 0, [float(c)], label or f"constant({c})")

    @classmethod
    def from_callable(cls, d: int, fn, regularity, label: str = "") -> "Potential":
        return cls(d, regularity, fn, None, label)

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, x: Point) -> tuple[float, float]:
        """Return (value, certified absolute error bound) at x."""
        return self.fn(x)

    def depth(self) -> int | None:
        if isinstance(self.regularity, LocallyConstant):
            return self.regularity.depth
        return None

    def truncation_depth(self) -> int:
        """Table depth used by finite-depth machinery (>= 1)."""
        m = self.depth()
        return max(1, m) if m is not None else 1


def evaluate(f: Potential, x: Point) -> tuple[float, float]:
    return f.evaluate(x)


def make_locally_constant(d: int, depth: int, values, label: str = "") -> Potential:
    """Potential reading only the first `depth` coordinates, from its table."""
    return Potential.from_table(d, depth, values, label)


def scale(f: Potential, c: float) -> Potential:
    """The potential c*f, with error bounds and regularity metadata rescaled."""
    if f.table is not None:
        return Potential.from_table(
            f.d, f.table.depth, c * f.table.values, label=f"{c}*{f.label}"
        )
    base = f.fn

    def fn(x: Point) -> tuple[float, float]:
        v, e = base(x)
        return c * v, abs(c) * e

    reg = f.regularity
    if isinstance(reg, Hoelder):
        reg = Hoelder(reg.gamma, abs(c) * reg.constant)
    elif isinstance(reg, SummableVariation):
        bound = reg.var_bound
        reg = SummableVariation(lambda n: abs(c) * bound(n))
    return Potential(f.d, reg, fn, None, f"{c}*{f.label}")


def truncate(f: Potential, depth: int, tail: Point | None = None) -> tuple[CylinderFunction, float]:
    """Depth-`depth` table of f with remote coordinates frozen to `tail`.

    Returns (table, bound) where bound certifies the truncation plus
    evaluation error:  |f(x) - table(x)| <= bound on every x extending the
    sampled words by an arbitrary tail.  For locally-constant f of depth
    <= `depth` the bound is 0 and the table is exact.
    """
    if tail is None:
        tail = Point.constant(0)
    size = check_table_size(f.d, depth)
    if f.table is not None and f.table.depth <= depth:
        return f.table.refine(depth), 0.0
    values = np.empty(size)
    err = 0.0
    for i, row in enumerate(word_table(depth, f.d)):
        v, e = f.evaluate(Point(tuple(int(s) for s in row) + tail.prefix, tail.cycle))
        values[i] = v
        err = max(err, e)
    return CylinderFunction(f.d, depth, values), err + var_upper(f, depth)


@dataclass(frozen=True)
class BirkhoffSum:
    n: int
    value: float
    error_bound: float


def birkhoff(f: Potential, x: Point, n: int) -> BirkhoffSum:
    """S_n f(x) = f(x) + f(sigma x) + ... + f(sigma^{n-1} x), with bound."""
    if n < 1:
        raise ValueError("n must be >= 1")
    vals, errs = [], []
    y = x
    for _ in range(n):
        v, e = f.evaluate(y)
        vals.append(v)
        errs.append(e)
        y = shift(y)
    return BirkhoffSum(n=n, value=math.fsum(vals), error_bound=math.fsum(errs))


def birkhoff_table(f: Potential, n: int) -> CylinderFunction:
    """Exact table of S_n f for a locally-constant f (depth m+n-1)."""
    if f.table is None:
        raise VariationUnavailable("birkhoff_table needs a table-backed potential")
    m = max(1, f.table.depth)
    tab = f.table.refine(m)
    depth = m + n - 1
    size = check_table_size(f.d, depth)
    idx = np.arange(size, dtype=np.int64)
    out = np.zeros(size)
    dm = f.d ** m
    for j in range(n):
        # word (w_{j+1}, ..., w_{j+m}) inside the length-(m+n-1) word
        block = (idx // f.d ** (depth - j - m)) % dm
        out += tab.values[block]
    return CylinderFunction(f.d, depth, out)


# ---------------------------------------------------------------------------
# Variation estimates
# ---------------------------------------------------------------------------

def _table_var(table: CylinderFunction, n: int) -> float:
    """Exact var_n of a depth-m table (0 when n >= m)."""
    if n >= table.depth:
        return 0.0
    blocks = table.values.reshape(table.d ** n, -1)
    return float(np.max(blocks.max(axis=1) - blocks.min(axis=1)))


def var_upper(f: Potential, n: int) -> float:
    """A certified upper bound on var_n(f); exact for locally-constant f."""
    if n < 0:
        raise ValueError("n must be >= 0")
    reg = f.regularity
    if isinstance(reg, LocallyConstant):
        return _table_var(f.table, n)
    if isinstance(reg, Hoelder):
        return reg.constant * 2.0 ** (-reg.gamma * n)
    if isinstance(reg, SummableVariation):
        if n < 1:
            raise VariationUnavailable("declared variation bounds start at n = 1")
        return float(reg.var_bound(n))
    raise VariationUnavailable(
        f"no variation metadata for {type(reg).__name__}; brute-force "
        "enumeration over finitely many tails would not be an upper bound"
    )


def var_n(f: Potential, n: int) -> float:
    """Alias for :func:`var_upper` (the returned value is always an upper bound)."""
    return var_upper(f, n)


def walters_estimate(f: Potential, p: int, n_sup: int) -> float:
    """Upper estimate of sup_{1<=n<=n_sup} var_{n+p}(S_n f).

    The quantity decays in p exactly when the potential satisfies the
    flat-Birkhoff-oscillation condition; the estimate is exact for
    locally-constant potentials (and then vanishes once p >= depth - 1)
    and a metadata majorant sum_{j=1}^{n_sup} var_{p+j}(f) otherwise.
    """
    if p < 1 or n_sup < 1:
        raise ValueError("p and n_sup must be >= 1")
    if f.table is not None:
        best = 0.0
        for n in range(1, n_sup + 1):
            best = max(best, _table_var(birkhoff_table(f, n), n + p))
        return best
    return math.fsum(var_upper(f, p + j) for j in range(1, n_sup + 1))


@dataclass(frozen=True)
class JopSeriesResult:
    partial_sum: float
    last_term: float
    growth_exponent: float
    diverging: bool
    n_terms: int


def jop_series(f: Potential, eps: float, n_terms: int) -> JopSeriesResult:
    """Partial sums of sum_n exp[-(1/2+eps)(var_1 + ... + var_n)].

    Divergence of the full series is the uniqueness criterion; the trend
    flag compares the term at n_terms with the one at n_terms//2 and
    reports diverging when the decay exponent s (terms ~ n^-s) is < 1.
    Terms are built from certified *upper* variation bounds, so the
    partial sum under-estimates the true series and the diverging flag is
    conservative.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if n_terms < 4:
        raise ValueError("need at least 4 terms for the trend flag")
    rate = 0.5 + eps
    cum = 0.0
    terms = np.empty(n_terms)
    for n in range(1, n_terms + 1):
        cum += var_upper(f, n)
        terms[n - 1] = math.exp(-rate * cum)
    half = terms[n_terms // 2 - 1]
    last = terms[-1]
    if last <= 0.0:
        exponent = math.inf
    else:
        exponent = math.log(half / last) / math.log(n_terms / (n_terms // 2))
    return JopSeriesResult(
        partial_sum=float(math.fsum(terms)),
        last_term=float(last),
        growth_exponent=float(exponent),
        diverging=bool(exponent < 1.0),
        n_terms=n_terms,
    )


# ---------------------------------------------------------------------------
# A run-length family on two symbols
# ---------------------------------------------------------------------------

def make_hofbauer_walters(
    a_seq: Callable[[int], float],
    c_seq: Callable[[int], float],
    a: float,
    b: float,
    c: float,
    var_decay: Callable[[int], float] | None = None,
    label: str = "hofbauer-walters",
) -> Potential:
    """Potential on two symbols determined by the leading run of the point.

    A point starting with exactly k >= 2 zeros followed by a one gets
    a_seq(k); one leading zero, or the constant-zero point, gets a;
    exactly k >= 2 leading ones followed by a zero gets c_seq(k); one
    leading one gets b; the constant-one point gets c.  Classification of
    eventually periodic points is exact, so every error bound is 0.

    a and c should be the limits of a_seq and c_seq for the potential to
    be continuous.  var_decay(n), when given, must dominate
    2 * max(sup_{k>=n}|a_seq(k)-a|, sup_{k>=n}|c_seq(k)-c|), which bounds
    var_n for n >= 2: two points agreeing on n coordinates either share
    their leading run (equal values) or both run past n.
    """

    def fn(x: Point) -> tuple[float, float]:
        s = x.coord(1)
        if x == Point.constant(s):
            return (a if s == 0 else c), 0.0
        k = 1
        while x.coord(k + 1) == s:
            k += 1
        if s == 0:
            return (a if k == 1 else float(a_seq(k))), 0.0
        return (b if k == 1 else float(c_seq(k))), 0.0

    if var_decay is not None:
        reg = SummableVariation(var_decay)
    else:
        reg = GenericContinuous()
    return Potential.from_callable(2, fn, reg, label)
