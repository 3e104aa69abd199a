import math

import numpy as np
import pytest

from ruellekit.potentials import (
    GenericContinuous,
    Hoelder,
    Potential,
    SummableVariation,
    VariationUnavailable,
    birkhoff,
    birkhoff_table,
    jop_series,
    make_hofbauer_walters,
    make_locally_constant,
    scale,
    truncate,
    var_n,
    var_upper,
    walters_estimate,
)
from ruellekit.shift import Point

MARKOV = Potential.from_table(
    2, 2, [math.log(2.0), 0.0, 0.0, 0.0], label="markov"
)


def brute_var(f, n, probe_depth=6):
    """Oscillation of f over each depth-n cylinder, by enumeration.

    Probes every word of length probe_depth >= table depth with a constant
    tail, which is exhaustive for a table-backed potential.
    """
    d = f.d
    worst = 0.0
    for w_idx in range(d**n):
        word = tuple((w_idx // d ** (n - 1 - k)) % d for k in range(n))
        vals = []
        for e_idx in range(d ** (probe_depth - n)):
            ext = tuple((e_idx // d ** (probe_depth - n - 1 - k)) % d for k in range(probe_depth - n))
            vals.append(f.evaluate(Point(word + ext, (0,)))[0])
        worst = max(worst, max(vals) - min(vals))
    return worst


def test_table_variation_exact():
    rng = np.random.default_rng(7)
    f = Potential.from_table(2, 3, rng.uniform(-1, 1, 8))
    for n in range(1, 3):
        assert var_upper(f, n) == pytest.approx(brute_var(f, n), abs=1e-14)
    assert var_upper(f, 3) == 0.0
    assert var_upper(f, 7) == 0.0
    assert var_n(f, 2) == var_upper(f, 2)


def test_hoelder_variation_majorant():
    def fn(x):
        # genuinely gamma-Hoelder: geometric series in the coordinates
        return sum(x.coord(i) * 2.0 ** (-0.5 * i) for i in range(1, 40)), 1e-12

    f = Potential.from_callable(2, fn, Hoelder(gamma=0.5, constant=4.0))
    for n in (1, 2, 5):
        assert var_upper(f, n) == 4.0 * 2.0 ** (-0.5 * n)
    with pytest.raises(VariationUnavailable):
        var_upper(Potential.from_callable(2, fn, GenericContinuous()), 1)


def test_birkhoff_matches_table_and_loop():
    f = MARKOV
    for n in (1, 2, 4):
        table = birkhoff_table(f, n)
        assert table.depth == n + 1
        for trial in range(20):
            rng = np.random.default_rng(trial)
            x = Point(tuple(rng.integers(0, 2, 6)), (int(rng.integers(0, 2)),))
            loop = math.fsum(f.evaluate(Point(x.coords(12)[k:], (x.coords(12)[-1],)))[0] for k in range(n))
            b = birkhoff(f, x, n)
            assert b.n == n
            assert b.value == pytest.approx(table.value_at(x), abs=1e-13)
            assert b.value == pytest.approx(loop, abs=1e-12)
    with pytest.raises(ValueError):
        birkhoff(f, Point.constant(0), 0)


def test_truncate_exact_for_tables():
    table, bound = truncate(MARKOV, 4)
    assert bound == 0.0
    assert table.depth == 4
    assert table.value_at(Point.from_literal("00|1")) == math.log(2.0)

    # truncating a callable reports the evaluation bound it inherited
    def fn(x):
        return float(x.coord(1)), 1e-9

    # truncating a callable charges the variation majorant plus evaluation error
    g = Potential.from_callable(2, fn, Hoelder(gamma=1.0, constant=1.0))
    _, bound = truncate(g, 3)
    assert bound == pytest.approx(2.0**-3 + 1e-9)


def test_scale_rescales_tables_and_metadata():
    f2 = scale(MARKOV, -2.0)
    assert f2.table.values[0] == pytest.approx(-2.0 * math.log(2.0))
    h = Potential.from_callable(2, lambda x: (0.0, 0.0), Hoelder(gamma=0.5, constant=3.0))
    assert scale(h, 4.0).regularity.constant == 12.0


def test_walters_estimate_vanishes_past_table_depth():
    # S_n f reads n + depth - 1 coordinates, so p >= depth - 1 sees no variation
    f = Potential.from_table(2, 3, np.arange(8.0))
    assert walters_estimate(f, 2, 8) == 0.0
    assert walters_estimate(f, 5, 8) == 0.0
    assert walters_estimate(f, 1, 8) > 0.0


def test_walters_estimate_is_sup_over_volumes():
    # depth-2 tables have S_n f of depth exactly n+1, so every p >= 1 vanishes
    assert walters_estimate(MARKOV, 1, 8) == 0.0
    rng = np.random.default_rng(3)
    f = Potential.from_table(2, 3, rng.uniform(-1, 1, 8))
    sups = [walters_estimate(f, 1, N) for N in (1, 2, 4, 8)]
    assert all(b >= a for a, b in zip(sups, sups[1:]))
    # the N = 1 term is var_2(S_1 f) = var_2(f)
    assert sups[0] == pytest.approx(var_upper(f, 2), abs=1e-14)


def test_jop_series_flags():
    # summable variations: the exponent stalls, the series grows linearly
    res = jop_series(MARKOV, eps=0.5, n_terms=64)
    assert res.diverging
    assert res.n_terms == 64
    assert res.partial_sum > 1.0

    # cumulative variation 2 log(n+1)/(1/2+eps): terms ~ (n+1)^{-2}, convergent
    c = 2.0 / (0.5 + 0.5)

    def var_bound(n):
        return c * (math.log(n + 1) - math.log(n))

    g = Potential.from_callable(2, lambda x: (0.0, 0.0), SummableVariation(var_bound))
    res2 = jop_series(g, eps=0.5, n_terms=256)
    assert not res2.diverging
    assert res2.last_term == pytest.approx(257.0**-2, rel=0.05)

    with pytest.raises(ValueError):
        jop_series(MARKOV, eps=0.5, n_terms=2)


def test_hofbauer_walters_classification():
    a_seq = lambda k: 1.0 / k
    c_seq = lambda k: -1.0 / k**2
    f = make_hofbauer_walters(a_seq, c_seq, a=0.25, b=5.0, c=-0.75)
    # leading zero-run of length k: k = 1 gives a, longer runs give a_seq(k)
    assert f.evaluate(Point.constant(0))[0] == 0.25
    assert f.evaluate(Point.from_literal("01|1"))[0] == 0.25
    assert f.evaluate(Point.from_literal("0001|1"))[0] == pytest.approx(1.0 / 3)
    # leading one-run of length k: k = 1 gives b, longer runs give c_seq(k)
    assert f.evaluate(Point.from_literal("10|0"))[0] == 5.0
    assert f.evaluate(Point.from_literal("110|0"))[0] == pytest.approx(-0.25)
    assert f.evaluate(Point.constant(1))[0] == -0.75
    assert f.d == 2


def test_hofbauer_walters_metadata():
    f = make_hofbauer_walters(lambda k: 1.0 / k, lambda k: 0.0, 0.0, 1.0, 0.0)
    assert isinstance(f.regularity, GenericContinuous)
    g = make_hofbauer_walters(
        lambda k: 1.0 / k, lambda k: 0.0, 0.0, 1.0, 0.0, var_decay=lambda n: 1.0 / n**2
    )
    assert isinstance(g.regularity, SummableVariation)
    assert var_upper(g, 3) == pytest.approx(1.0 / 9)


def test_make_locally_constant_matches_from_table():
    f = make_locally_constant(3, 1, [0.0, 1.0, 2.0])
    assert f.evaluate(Point.from_literal("2|0"))[0] == 2.0
    with pytest.raises(ValueError):
        make_locally_constant(2, 2, [1.0, 2.0, 3.0])
