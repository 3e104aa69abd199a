"""Finite-volume Gibbs kernels on the full shift, and their consistency checks.

The volume-n kernel conditioned on a boundary configuration y averages a
test function over all ways of rewriting the first n coordinates:

    kernel(g | y) = sum_w  e^{beta S_n f(w . sigma^n y)} g(w . sigma^n y)
                    / partition

where w runs over the d^n words.  The kernel reads y only through
sigma^n y (the coordinates outside the volume); every routine here takes
that image explicitly or computes it, so boundary dependence is
structural rather than numerical.

All weights pass through a max-subtracted log-sum-exp, so adding a
constant to the exponent moves every log-weight by the same amount and
cancels in the normalised kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potentials import (
    Hoelder,
    LocallyConstant,
    Potential,
    VariationUnavailable,
    birkhoff,
    birkhoff_table,
    scale,
    var_upper,
)
from .shift import (
    CylinderFunction,
    CylinderMeasure,
    Point,
    check_table_size,
    integrate,
    shift_n,
    word_index,
    word_table,
)
from .transfer import DEFAULT_MAX_ITER, DEFAULT_TOL, normalize, power_iterate


# ---------------------------------------------------------------------------
# Log-weights over the volume words
# ---------------------------------------------------------------------------

def _log_weights_given_tail(
    f: Potential, beta: float, n: int, tail: Point
) -> tuple[np.ndarray, float]:
    """log-weights beta * S_n f(w . tail) over all d^n words w, with bound.

    Table-backed potentials index one exact S_n table; anything else walks
    the words through the certified evaluator.
    """
    d = f.d
    check_table_size(d, n)
    if f.table is not None:
        m = f.truncation_depth()
        sn = birkhoff_table(f, n)  # depth n + m - 1
        stride = d ** (m - 1)
        offset = word_index(tail.coords(m - 1), d) if m > 1 else 0
        logw = beta * sn.values[np.arange(d ** n) * stride + offset]
        return logw, 0.0
    logw = np.empty(d ** n)
    err = 0.0
    for i, row in enumerate(word_table(n, d)):
        w = tuple(int(s) for s in row)
        s = birkhoff(f, Point(w + tail.prefix, tail.cycle), n)
        logw[i] = beta * s.value
        err = max(err, abs(beta) * s.error_bound)
    return logw, err


def _softmax(logw: np.ndarray) -> np.ndarray:
    shifted = np.exp(logw - np.max(logw))
    return shifted / shifted.sum()


def _test_values_given_tail(
    g: CylinderFunction, n: int, tail: Point
) -> np.ndarray:
    """g(w . tail) over all d^n words w (g of any depth)."""
    d, q = g.d, g.depth
    if q <= n:
        return np.repeat(g.values, d ** (n - q))
    ext = word_index(tail.coords(q - n), d)
    idx = np.arange(d ** n) * d ** (q - n) + ext
    return g.values[idx]


def _kernel_given_tail(
    f: Potential, beta: float, n: int, tail: Point, g: CylinderFunction
) -> tuple[float, float]:
    logw, werr = _log_weights_given_tail(f, beta, n, tail)
    p = _softmax(logw)
    gv = _test_values_given_tail(g, n, tail)
    value = float(p @ gv)
    # each weight carries relative error at most e^{2 werr} - 1
    bound = math.expm1(2.0 * werr) * float(np.max(np.abs(gv))) + 1e-15
    return value, bound


# ---------------------------------------------------------------------------
# Public kernel interface
# ---------------------------------------------------------------------------

def partition(f: Potential, beta: float, n: int, y: Point) -> float:
    """Z_n(y): the total weight sum_w exp(beta S_n f(w . sigma^n y))."""
    if n < 1:
        raise ValueError("volume must contain at least one site")
    logw, _ = _log_weights_given_tail(f, beta, n, shift_n(y, n))
    top = float(np.max(logw))
    return math.exp(top) * float(np.exp(logw - top).sum())


def kernel(
    f: Potential, beta: float, n: int, y: Point, g: CylinderFunction
) -> float:
    """The volume-n Gibbs average of g conditioned on the boundary y."""
    if g.d != f.d:
        raise ValueError("alphabet mismatch")
    if n < 1:
        raise ValueError("volume must contain at least one site")
    return _kernel_given_tail(f, beta, n, shift_n(y, n), g)[0]


def kernel_measure(
    f: Potential, beta: float, n: int, y: Point, depth_out: int | None = None
) -> CylinderMeasure:
    """The kernel as a measure on depth-`depth_out` cylinders (default n)."""
    depth_out = n if depth_out is None else depth_out
    if not 0 <= depth_out <= n:
        raise ValueError("cylinders of that depth are not resolved inside the volume")
    logw, _ = _log_weights_given_tail(f, beta, n, shift_n(y, n))
    p = _softmax(logw)
    return CylinderMeasure(f.d, n, p).coarsen(depth_out)


def tail_measurability_check(
    f: Potential, beta: float, n: int, y1: Point, y2: Point, g: CylinderFunction
) -> float:
    """|kernel(g|y1) - kernel(g|y2)| for boundaries agreeing beyond the volume.

    Raises if sigma^n y1 != sigma^n y2; the returned difference is exactly
    zero because both kernels are computed from the same tail image.
    """
    if shift_n(y1, n) != shift_n(y2, n):
        raise ValueError("boundaries disagree outside the volume")
    return abs(kernel(f, beta, n, y1, g) - kernel(f, beta, n, y2, g))


def constant_shift_check(
    f: Potential, beta: float, n: int, y: Point, g: CylinderFunction, a_n: float
) -> float:
    """|kernel from exponent beta S_n f  vs  exponent beta S_n f - a_n|.

    Shifting the exponent by a constant moves every log-weight equally and
    the max-subtraction removes it again, so this measures pure
    floating-point jitter.
    """
    tail = shift_n(y, n)
    logw, _ = _log_weights_given_tail(f, beta, n, tail)
    gv = _test_values_given_tail(g, n, tail)
    k1 = float(_softmax(logw) @ gv)
    k2 = float(_softmax(logw - a_n) @ gv)
    return abs(k1 - k2)


# ---------------------------------------------------------------------------
# Consistency checks
# ---------------------------------------------------------------------------

def finite_volume_dlr_check(
    f: Potential,
    beta: float,
    n: int,
    r: int,
    z: Point,
    g: CylinderFunction,
) -> float:
    """Tower property of the kernels: averaging the volume-n kernel over the
    volume-(n+r) one reproduces the volume-(n+r) average of g.

    Both sides are computed by full enumeration; the inner kernel depends
    on its boundary through coordinates n+1, ..., n+r of the outer word
    plus sigma^{n+r} z, so it is tabulated once per d^r suffix.  Returns
    |lhs - rhs|.
    """
    d = f.d
    tail_z = shift_n(z, n + r)
    inner = np.empty(d ** r)
    for i, row in enumerate(word_table(r, d)):
        u = tuple(int(s) for s in row)
        inner[i] = _kernel_given_tail(f, beta, n, Point(u + tail_z.prefix, tail_z.cycle), g)[0]
    logw, _ = _log_weights_given_tail(f, beta, n + r, tail_z)
    p = _softmax(logw)
    suffix = np.arange(d ** (n + r)) % d ** r
    lhs = float(p @ inner[suffix])
    rhs = _kernel_given_tail(f, beta, n + r, tail_z, g)[0]
    return abs(lhs - rhs)


def dlr_residual(
    f: Potential,
    beta: float,
    mu: CylinderMeasure,
    n: int,
    g: CylinderFunction,
    tail: Point,
) -> tuple[float, float]:
    """How far mu is from solving the volume-n equation  mu(kernel(g|.)) = mu(g).

    mu lives on depth-M cylinders, each represented by the point
    word . tail when the integrand reads past depth M.  Returns
    (residual, quadrature_bound): the integrand x -> kernel(g|x) depends
    on coordinates n+1, ..., max(n + depth(f) - 1, depth(g)); when M
    covers that range the quadrature bound is zero (representative points
    are exact) and the residual measures mu itself.  Otherwise the bound
    accumulates variation estimates for the unresolved coordinates.
    """
    d = f.d
    if mu.d != d or g.d != d:
        raise ValueError("alphabet mismatch")
    M = mu.depth
    if M < n:
        raise ValueError(f"measure depth {M} does not resolve the volume {n}")
    inner = np.empty(d ** (M - n))
    kernel_err = 0.0
    for i, row in enumerate(word_table(M - n, d)):
        u = tuple(int(s) for s in row)
        inner[i], b = _kernel_given_tail(f, beta, n, Point(u + tail.prefix, tail.cycle), g)
        kernel_err = max(kernel_err, b)
    suffix = np.arange(d ** M) % d ** (M - n)
    lhs = float(mu.weights @ inner[suffix])
    if g.depth <= M:
        rhs = integrate(mu, g)
    else:
        rhs = float(mu.weights @ _test_values_given_tail(g, M, tail))
    quad = kernel_err * mu.total_mass() + _representative_point_bound(f, beta, M, n, g)
    return abs(lhs - rhs), quad


def _representative_point_bound(
    f: Potential, beta: float, M: int, n: int, g: CylinderFunction
) -> float:
    """Bound on replacing each depth-M cylinder by one representative point.

    The integrand's weight exponents move by at most beta * n * var_{M-n+1}(f)
    across a depth-M cylinder, and the g-values by var based on depth.
    """
    gap = 0.0
    if g.depth > M:
        gap += float(np.max(g.values) - np.min(g.values))
    try:
        osc = var_upper(f, max(M - n + 1, 1))
    except VariationUnavailable:
        return math.inf
    weight_move = abs(beta) * n * osc
    gmax = float(np.max(np.abs(g.values)))
    return gap + math.expm1(2.0 * weight_move) * gmax


# ---------------------------------------------------------------------------
# Kernel limits along growing volumes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TLRow:
    n: int
    cylinder: str
    boundary_id: str
    K_n: float
    nu_ref: float
    deviation: float


def tl_sequence(
    f: Potential,
    beta: float,
    cylinders: list[tuple[int, ...]],
    boundaries: list[Point],
    n_max: int,
    reference: CylinderMeasure | None = None,
    tol: float = DEFAULT_TOL,
) -> tuple[list[TLRow], dict[int, float]]:
    """Kernel masses of cylinders against the eigenprobability, per volume.

    For each volume n <= n_max (starting at the deepest cylinder), each
    cylinder word and each boundary point, tabulates the kernel mass, the
    eigenprobability reference, and their deviation.  Returns the rows and
    the per-volume worst deviation over (cylinder, boundary) pairs -- the
    sequence whose decay witnesses convergence to the eigenprobability.

    The reference defaults to power-iterated eigendata of beta*f at a
    depth resolving every requested cylinder.
    """
    if not cylinders or not boundaries:
        raise ValueError("need at least one cylinder and one boundary")
    qmax = max(len(w) for w in cylinders)
    if reference is None:
        depth = max(qmax, f.truncation_depth() - 1, 1)
        reference = power_iterate(scale(f, beta), depth, tol=tol).nu
    rows: list[TLRow] = []
    worst: dict[int, float] = {}
    for n in range(qmax, n_max + 1):
        dev = 0.0
        for w in cylinders:
            ref = reference.cylinder_mass(w)
            ind = CylinderFunction.indicator(f.d, w)
            for y in boundaries:
                val = kernel(f, beta, n, y, ind)
                delta = abs(val - ref)
                dev = max(dev, delta)
                rows.append(
                    TLRow(
                        n=n,
                        cylinder="".join(str(s) for s in w),
                        boundary_id=y.literal,
                        K_n=val,
                        nu_ref=ref,
                        deviation=delta,
                    )
                )
        worst[n] = dev
    return rows, worst


# ---------------------------------------------------------------------------
# Boundary-independence certificates
# ---------------------------------------------------------------------------

def default_tails(d: int) -> list[Point]:
    """The default tail set for D_estimate: constants, plus 0101... for d = 2."""
    tails = [Point.constant(s) for s in range(d)]
    if d == 2:
        tails.append(Point.periodic((0, 1)))
    return tails


def D_estimate(
    f: Potential, N: int, tails: list[Point] | None = None
) -> tuple[float, float]:
    """Worst oscillation of S_n f across tail choices, n <= N, plus bound.

    value = max over n <= N, over length-n words w, over pairs t, t' from
    the tail set, of |S_n f(w.t) - S_n f(w.t')|.  bound is the metadata
    majorant sum_{i>=1} var_i(f) (finite for locally-constant and Hoelder
    regularity, inf otherwise).  For a depth-m potential the estimate
    stabilises once N >= m - 1: longer words push every tail disagreement
    out of what any Birkhoff term reads.
    """
    tails = default_tails(f.d) if tails is None else tails
    if len(tails) < 2:
        raise ValueError("need at least two tails to compare")
    d = f.d
    value = 0.0
    if f.table is not None:
        m = f.truncation_depth()
        for n in range(1, N + 1):
            sn = birkhoff_table(f, n)
            stride = d ** (m - 1)
            base = np.arange(d ** n) * stride
            cols = [
                sn.values[base + (word_index(t.coords(m - 1), d) if m > 1 else 0)]
                for t in tails
            ]
            stack = np.stack(cols)
            value = max(value, float(np.max(stack.max(axis=0) - stack.min(axis=0))))
    else:
        for n in range(1, N + 1):
            for row in word_table(n, d):
                w = tuple(int(s) for s in row)
                vals = [
                    birkhoff(f, Point(w + t.prefix, t.cycle), n).value
                    for t in tails
                ]
                value = max(value, max(vals) - min(vals))
    return value, _variation_sum_bound(f)


def _variation_sum_bound(f: Potential) -> float:
    """sum_{i>=1} var_i(f) from metadata: exact finite sum for
    locally-constant potentials, the closed geometric form for Hoelder,
    inf when no summable closed form exists."""
    reg = f.regularity
    if isinstance(reg, LocallyConstant):
        return math.fsum(var_upper(f, i) for i in range(1, max(reg.depth, 1)))
    if isinstance(reg, Hoelder):
        q = 2.0 ** (-reg.gamma)
        return reg.constant * q / (1.0 - q)
    return math.inf


def sandwich_check(
    f: Potential,
    beta: float,
    n: int,
    C: tuple[int, ...],
    y: Point,
    z: Point,
    D: float,
) -> tuple[bool, float]:
    """Does  e^{-2 D beta} <= kernel([C]|y) / kernel([C]|z) <= e^{2 D beta} hold?

    Returns (holds, margin) where margin is the worst of the two
    multiplicative slacks (>= 1 exactly when the comparison holds).  Valid
    whenever sigma^n y and sigma^n z lie in the tail family D was
    estimated over.
    """
    if n < len(C):
        raise ValueError("volume must resolve the cylinder")
    ind = CylinderFunction.indicator(f.d, C)
    ky = kernel(f, beta, n, y, ind)
    kz = kernel(f, beta, n, z, ind)
    if ky <= 0.0 or kz <= 0.0:
        raise ValueError("sandwich needs strictly positive kernel masses")
    spread = math.exp(2.0 * abs(beta) * D)
    margin = min(spread * kz / ky, spread * ky / kz)
    return margin >= 1.0, margin


# ---------------------------------------------------------------------------
# Change of measure (eigenprobability vs normalised fixed point)
# ---------------------------------------------------------------------------

def change_of_measure_check(
    f: Potential,
    depth: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Max over depth-m cylinder indicators g of |nu(g) - mu(g / psi)|.

    nu and psi are the eigenprobability and eigenfunction of f at the
    given depth, and mu is the fixed measure of the normalised potential;
    the two integrals agree because mu has density psi against nu.
    """
    rpf = power_iterate(f, depth, tol, max_iter)
    fbar = normalize(f, rpf)
    mu = power_iterate(fbar, depth, tol, max_iter).nu
    return float(np.max(np.abs(rpf.nu.weights - mu.weights / rpf.psi.values)))
