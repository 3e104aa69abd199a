"""Specification kernels against brute-force enumeration oracles."""

import itertools
import math

import numpy as np
import pytest

from ruellekit.dlr import (
    D_estimate,
    change_of_measure_check,
    constant_shift_check,
    default_tails,
    dlr_residual,
    finite_volume_dlr_check,
    kernel,
    kernel_measure,
    partition,
    sandwich_check,
    tail_measurability_check,
    tl_sequence,
)
from ruellekit.potentials import GenericContinuous, Hoelder, Potential, birkhoff, scale
from ruellekit.shift import CylinderFunction, CylinderMeasure, Point, prepend, shift_n
from ruellekit.transfer import apply, normalize, power_iterate

MARKOV = Potential.from_table(2, 2, [math.log(2.0), 0.0, 0.0, 0.0], label="markov")


def brute_kernel(f, beta, n, y, g):
    """Direct enumeration of the volume-n kernel from its definition."""
    num = 0.0
    den = 0.0
    for w in itertools.product(range(f.d), repeat=n):
        x = prepend(shift_n(y, n), w)
        weight = math.exp(beta * birkhoff(f, x, n).value)
        num += weight * g.value_at(x)
        den += weight
    return num / den


def brute_partition(f, beta, n, y):
    return math.fsum(
        math.exp(beta * birkhoff(f, prepend(shift_n(y, n), w), n).value)
        for w in itertools.product(range(f.d), repeat=n)
    )


def random_point(rng, d):
    return Point(tuple(rng.integers(0, d, int(rng.integers(0, 4)))),
                 tuple(rng.integers(0, d, int(rng.integers(1, 4)))))


def test_partition_counts_when_potential_vanishes():
    zero = Potential.constant(2, 0.0)
    for n in (1, 2, 3, 5):
        assert partition(zero, 1.0, n, Point.constant(0)) == pytest.approx(2.0**n)


def test_partition_matches_enumeration():
    rng = np.random.default_rng(21)
    for trial in range(8):
        f = Potential.from_table(2, 2, rng.uniform(-1.0, 1.0, 4))
        y = random_point(rng, 2)
        n = int(rng.integers(1, 5))
        beta = float(rng.uniform(0.2, 2.0))
        assert partition(f, beta, n, y) == pytest.approx(
            brute_partition(f, beta, n, y), rel=1e-13
        )


def test_kernel_matches_enumeration():
    rng = np.random.default_rng(22)
    for trial in range(10):
        d = 2 if trial % 2 == 0 else 3
        depth = int(rng.integers(1, 4))
        f = Potential.from_table(d, depth, rng.uniform(-1.0, 1.0, d**depth))
        n = int(rng.integers(1, 4))
        q = int(rng.integers(1, n + 3))
        g = CylinderFunction(d, q, rng.uniform(-1.0, 1.0, d**q))
        y = random_point(rng, d)
        beta = float(rng.uniform(0.2, 1.5))
        assert kernel(f, beta, n, y, g) == pytest.approx(
            brute_kernel(f, beta, n, y, g), abs=1e-13
        )


def test_kernel_is_transfer_ratio():
    # K_n(g|y) = (L^n g / L^n 1)(sigma^n y) once the tables resolve everything
    depth = 8
    rng = np.random.default_rng(23)
    g = CylinderFunction(2, 3, rng.uniform(-1.0, 1.0, 8))
    one = CylinderFunction.constant(2, 1.0, depth)
    y = Point.from_literal("1101|01")
    num = g.refine(depth)
    den = one
    for n in (1, 2, 3):
        num = apply(MARKOV, num, depth)
        den = apply(MARKOV, den, depth)
        tail = shift_n(y, n)
        ratio = num.value_at(tail) / den.value_at(tail)
        assert kernel(MARKOV, 1.0, n, y, g) == pytest.approx(ratio, rel=1e-12)


def test_kernel_measure_coarsens_to_kernel_of_indicators():
    rng = np.random.default_rng(24)
    f = Potential.from_table(2, 2, rng.uniform(-1.0, 1.0, 4))
    y = Point.from_literal("01|1")
    km = kernel_measure(f, 1.0, 3, y, depth_out=2)
    assert km.total_mass() == pytest.approx(1.0, abs=1e-12)
    for w in itertools.product(range(2), repeat=2):
        ind = CylinderFunction.indicator(2, w)
        assert km.cylinder_mass(w) == pytest.approx(
            kernel(f, 1.0, 3, y, ind), abs=1e-13
        )


def test_tail_measurability():
    g = CylinderFunction.indicator(2, (0, 1))
    y1 = Point.from_literal("10|01")
    y2 = Point.from_literal("01|01")  # same sigma^2 image
    assert tail_measurability_check(MARKOV, 1.0, 2, y1, y2, g) == 0.0
    with pytest.raises(ValueError):
        tail_measurability_check(MARKOV, 1.0, 2, y1, Point.constant(0), g)


def test_constant_shift_invariance():
    rng = np.random.default_rng(25)
    for trial in range(10):
        f = Potential.from_table(2, 2, rng.uniform(-1.0, 1.0, 4))
        g = CylinderFunction(2, 2, rng.uniform(-1.0, 1.0, 4))
        y = random_point(rng, 2)
        a_n = float(rng.uniform(-50.0, 50.0))
        res = constant_shift_check(f, 1.0, 3, y, g, a_n)
        assert res < 1e-12


def test_finite_volume_consistency_identity():
    rng = np.random.default_rng(26)
    for trial in range(10):
        f = Potential.from_table(2, 2, rng.uniform(-1.0, 1.0, 4))
        n = int(rng.integers(1, 5))
        r = int(rng.integers(1, 5))
        q = int(rng.integers(1, n + r + 1))
        g = CylinderFunction(2, q, rng.uniform(-1.0, 1.0, 2**q))
        z = random_point(rng, 2)
        assert finite_volume_dlr_check(f, 1.0, n, r, z, g) < 1e-12


def test_dlr_residual_vanishes_for_eigenprobability():
    f = MARKOV
    nu = power_iterate(f, 6, tol=1e-14).nu
    g = CylinderFunction.indicator(2, (0, 1))
    for n in (1, 2, 3):
        res, quad = dlr_residual(f, 1.0, nu, n, g, Point.constant(0))
        assert quad < 1e-12
        assert res < 1e-11


def test_dlr_residual_detects_wrong_measure():
    g = CylinderFunction.indicator(2, (0,)).refine(2)
    uniform = CylinderMeasure.uniform(2, 6)
    res, _ = dlr_residual(MARKOV, 1.0, uniform, 2, g, Point.constant(0))
    assert res > 0.01


def test_dlr_residual_quadrature_bound_is_honest():
    # a shallow measure cannot resolve the integrand; the certified bound
    # must cover the gap to a fully resolved computation
    f = MARKOV
    nu_deep = power_iterate(f, 6, tol=1e-14).nu
    nu_shallow = nu_deep.coarsen(2)
    g = CylinderFunction.indicator(2, (0,))
    res_deep, _ = dlr_residual(f, 1.0, nu_deep, 2, g, Point.constant(0))
    res_shallow, quad = dlr_residual(f, 1.0, nu_shallow, 2, g, Point.constant(0))
    assert quad > 0.0
    assert abs(res_shallow - res_deep) <= quad


def test_tl_rows_converge_to_eigenprobability():
    fbar = normalize(MARKOV, power_iterate(MARKOV, 2, tol=1e-13))
    cylinders = [(0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]
    boundaries = [Point.constant(0), Point.constant(1), Point.from_literal("|01")]
    rows, worst = tl_sequence(fbar, 1.0, cylinders, boundaries, 10)
    assert set(r.n for r in rows) == set(range(2, 11))
    devs = [worst[n] for n in sorted(worst)]
    assert all(b <= a * 1.001 + 1e-15 for a, b in zip(devs[2:], devs[3:]))
    assert devs[-1] < 1e-6


def test_D_estimate_stabilizes_and_bounds():
    rng = np.random.default_rng(27)
    f = Potential.from_table(2, 3, rng.uniform(-1.0, 1.0, 8))
    v1, b1 = D_estimate(f, 4)
    v2, b2 = D_estimate(f, 8)
    assert abs(v1 - v2) < 1e-12
    assert v1 <= b1 + 1e-12
    assert b1 == b2

    h = Potential.from_callable(2, lambda x: (0.0, 0.0), Hoelder(gamma=0.5, constant=1.0))
    _, bh = D_estimate(h, 3)
    q = 2.0**-0.5
    assert bh == pytest.approx(q / (1 - q))

    rough = Potential.from_callable(2, lambda x: (0.0, 0.0), GenericContinuous())
    _, binf = D_estimate(rough, 3)
    assert math.isinf(binf)


def test_sandwich_certificate():
    D, _ = D_estimate(MARKOV, 6)
    tails = default_tails(2)
    rng = np.random.default_rng(28)
    for trial in range(10):
        n = int(rng.integers(1, 7))
        C = tuple(rng.integers(0, 2, int(rng.integers(1, min(n, 3) + 1))))
        y = tails[int(rng.integers(0, len(tails)))]
        z = tails[int(rng.integers(0, len(tails)))]
        holds, margin = sandwich_check(MARKOV, 1.0, n, C, y, z, D)
        assert holds
        assert margin >= 1.0
    # an understated D must be caught: with D = 0 any kernel gap violates
    holds, margin = sandwich_check(MARKOV, 1.0, 1, (0,), Point.constant(0), Point.constant(1), 0.0)
    assert margin < 1.0 and not holds
    with pytest.raises(ValueError):
        sandwich_check(MARKOV, 1.0, 1, (0, 1), tails[0], tails[1], D)


def test_change_of_measure():
    assert change_of_measure_check(MARKOV, 3, tol=1e-13) < 1e-10
    rng = np.random.default_rng(29)
    f = Potential.from_table(2, 2, rng.uniform(-1.0, 1.0, 4))
    assert change_of_measure_check(f, 3, tol=1e-13) < 1e-9


def test_scaled_kernel_is_beta_kernel():
    # beta enters only through beta*f
    rng = np.random.default_rng(30)
    f = Potential.from_table(2, 2, rng.uniform(-1.0, 1.0, 4))
    g = CylinderFunction(2, 2, rng.uniform(-1.0, 1.0, 4))
    y = Point.from_literal("0|1")
    beta = 1.7
    assert kernel(f, beta, 3, y, g) == pytest.approx(
        kernel(scale(f, beta), 1.0, 3, y, g), rel=1e-12
    )
