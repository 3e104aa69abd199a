"""Many-body interactions on the lattice of coordinates 1, 2, 3, ...

An interaction assigns to finitely many supports A a local term Phi_A that
depends only on the coordinates in A; absent supports are identically
zero.  Two support shapes cover everything built here:

* Progression(k, n): the contiguous block {k, ..., 2k+n} of k+n+1 sites.
  These arise from telescoping a potential along its first coordinate.
* PairSupport(i, j): two-body terms, as in the spin-chain families.

from_potential reproduces a potential from its telescoped differences:
with a fixed base configuration y,

    Phi_{A(k,n)}(x) = f(x_k..x_{2k+n}, y_{2k+n+1}, ...)
                      - f(x_k..x_{2k+n-1}, y_{2k+n}, ...)        (n >= 1)
    Phi_{A(k,0)}(x) = f(x_k..x_{2k}, y_{2k+1}, ...) - f(y)

so that summing the supports containing site 1 rebuilds f(x) - f(y), and
the Hamiltonian of the volume {1..n} (all stored supports meeting it)
telescopes to  S_n f(x) - n f(y).

The reported norm groups supports by their *leading* site:
value = sup_s sum over stored A with min A = s of sup|Phi_A|.  Every
per-volume bound stated for the sup-over-memberships version holds for
this grouping too (each A with A meeting {1..n} has its leading site in
{1..n}), and it is the arithmetic under which the first-neighbour chain
has norm exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .potentials import (
    Hoelder,
    LocallyConstant,
    Potential,
    var_upper,
)
from .shift import (
    Point,
    check_table_size,
    shift_n,
    word_index,
    word_table,
)


# ---------------------------------------------------------------------------
# Supports and terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Progression:
    """The contiguous block {k, ..., 2k+n}; k >= 1, n >= 0."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 1 or self.n < 0:
            raise ValueError("need k >= 1 and n >= 0")

    @property
    def min_site(self) -> int:
        return self.k

    @property
    def size(self) -> int:
        return self.k + self.n + 1

    def sites(self) -> tuple[int, ...]:
        return tuple(range(self.k, 2 * self.k + self.n + 1))


@dataclass(frozen=True, order=True)
class PairSupport:
    i: int
    j: int

    def __post_init__(self):
        if not 1 <= self.i < self.j:
            raise ValueError("need 1 <= i < j")

    @property
    def min_site(self) -> int:
        return self.i

    @property
    def size(self) -> int:
        return 2

    def sites(self) -> tuple[int, ...]:
        return (self.i, self.j)


@dataclass(frozen=True)
class InteractionTerm:
    """One local term: a value table over (a prefix of) its support.

    For a Progression the table reads the first local_depth sites of the
    block (enough for potentials that only see that far); for a pair it
    always reads both sites.  sup_bound certifies sup|Phi_A|.
    """

    support: object
    d: int
    local_depth: int
    values: np.ndarray = field(repr=False)
    sup_bound: float = 0.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        arr.setflags(write=False)
        expected = self.d ** self.local_depth
        if arr.shape != (expected,):
            raise ValueError(f"expected {expected} values, got {arr.shape}")
        object.__setattr__(self, "values", arr)
        if self.sup_bound == 0.0:
            object.__setattr__(self, "sup_bound", float(np.max(np.abs(arr))))

    def value_at(self, x: Point) -> float:
        sites = self.support.sites()[: self.local_depth]
        word = tuple(x.coord(i) for i in sites)
        return float(self.values[word_index(word, self.d)])


@dataclass(frozen=True)
class Interaction:
    d: int
    terms: tuple[InteractionTerm, ...]
    norm_remainder: float = 0.0
    translation_invariant: bool = False
    label: str = ""

    def anchors(self) -> list[int]:
        return sorted({t.support.min_site for t in self.terms})

    def terms_at_anchor(self, s: int) -> list[InteractionTerm]:
        return [t for t in self.terms if t.support.min_site == s]

    def max_anchor(self) -> int:
        return max((t.support.min_site for t in self.terms), default=0)


# ---------------------------------------------------------------------------
# Potential -> interaction
# ---------------------------------------------------------------------------

def _argument_point(block: Sequence[int], y: Point, offset: int) -> Point:
    """The sequence (block..., y_{offset+1}, y_{offset+2}, ...)."""
    tail = shift_n(y, offset)
    return Point(tuple(block) + tail.prefix, tail.cycle)


def from_potential(
    f: Potential, y: Point, k_max: int, n_max: int
) -> Interaction:
    """Telescope f into progression terms, relative to the base point y.

    Stores supports A(k, n) for 1 <= k <= k_max and 0 <= n <= n_max,
    dropping terms that vanish identically (for a depth-m locally-constant
    potential that is every n >= 1 term with k + n >= m, so the result is
    finite as soon as the cutoffs cover the depth).  The tables are exact
    up to f's own evaluation bound.
    """
    depth = f.depth()  # None when not locally constant
    f_y, err_y = f.evaluate(y)
    terms: list[InteractionTerm] = []
    for k in range(1, k_max + 1):
        for n in range(0, n_max + 1):
            sup = Progression(k, n)
            block_len = sup.size
            if depth is not None and n >= 1 and k + n >= depth:
                continue  # both telescoped arguments agree on everything f reads
            t = block_len if depth is None else min(block_len, max(depth, 1))
            check_table_size(f.d, t)
            words = word_table(t, f.d)
            vals = np.empty(len(words))
            err = err_y if n == 0 else 0.0
            for i, row in enumerate(words):
                u = tuple(int(s) for s in row)
                v1, e1 = f.evaluate(_argument_point(u, y, 2 * k + n))
                if n == 0:
                    v2, e2 = f_y, err_y
                else:
                    v2, e2 = f.evaluate(_argument_point(u[:-1], y, 2 * k + n - 1))
                vals[i] = v1 - v2
                err = max(err, e1 + e2)
            if np.all(vals == 0.0):
                continue
            terms.append(
                InteractionTerm(
                    sup, f.d, t, vals, float(np.max(np.abs(vals))) + err
                )
            )
    return Interaction(
        d=f.d,
        terms=tuple(terms),
        norm_remainder=_from_potential_remainder(f, k_max, n_max),
        translation_invariant=False,
        label=f"telescoped({f.label})" if f.label else "telescoped",
    )


def _from_potential_remainder(f: Potential, k_max: int, n_max: int) -> float:
    """Certified bound on the per-leading-site sums dropped by the cutoffs."""
    reg = f.regularity
    if isinstance(reg, LocallyConstant):
        m = reg.depth
        if k_max >= max(1, m) and n_max >= max(0, m - 1):
            return 0.0
        return 2.0 * var_upper(f, 0)
    if isinstance(reg, Hoelder):
        # The two telescoped arguments of the (k, n >= 1) term agree on
        # their first k+n coordinates, so sup|Phi_{A(k,n)}| <= K 2^(-g(k+n)).
        gamma, K = reg.gamma, reg.constant
        q = 2.0 ** (-gamma)
        # n-tail at a stored leading site k (worst at k = 1):
        n_tail = K * q ** (n_max + 2) / (1.0 - q)
        # an unstored leading site k > k_max carries its n = 0 term
        # (bounded by var_0) plus the full n >= 1 geometric sum
        unstored = var_upper(f, 0) + K * q ** (k_max + 2) / (1.0 - q)
        return max(n_tail, unstored)
    # No metadata: the caller still gets the exact norm of the stored part.
    return math.inf


def reconstruct_at_site1(phi: Interaction, x: Point) -> float:
    """Sum of Phi_A(x) over stored supports whose leading site is 1."""
    return math.fsum(t.value_at(x) for t in phi.terms_at_anchor(1))


def hamiltonian_from_interaction(phi: Interaction, n: int, x: Point) -> float:
    """H_n(x): total stored interaction of supports meeting {1, ..., n}.

    A support meets the volume exactly when its leading site does, so this
    sums the terms with min A <= n.  Callers must keep n within the stored
    anchor range (the truncated family has nothing beyond it).
    """
    if n < 1:
        raise ValueError("volume must contain at least site 1")
    if n > phi.max_anchor():
        raise ValueError(
            f"volume {n} exceeds the stored anchor range {phi.max_anchor()}"
        )
    return math.fsum(
        t.value_at(x) for t in phi.terms if t.support.min_site <= n
    )


@dataclass(frozen=True)
class NormResult:
    value: float       # exact norm of the stored terms (leading-site grouping)
    remainder: float   # certified bound on what the truncation dropped

    @property
    def upper(self) -> float:
        return self.value + self.remainder


def interaction_norm(phi: Interaction, site_range: int | None = None) -> NormResult:
    """sup over leading sites of the summed term bounds, plus remainder.

    Scans the stored anchors up to site_range (all of them by default; the
    first anchor suffices for translation-invariant families).  The
    remainder certifies the contribution of supports dropped by whatever
    truncation built the interaction.
    """
    if phi.translation_invariant:
        anchors = [1]
    else:
        anchors = phi.anchors()
        if site_range is not None:
            anchors = [s for s in anchors if s <= site_range]
    value = 0.0
    for s in anchors:
        value = max(value, math.fsum(t.sup_bound for t in phi.terms_at_anchor(s)))
    return NormResult(value=value, remainder=phi.norm_remainder)


# ---------------------------------------------------------------------------
# Spin-chain families
# ---------------------------------------------------------------------------

def ising_nn(site_range: int = 32) -> Interaction:
    """Phi_{{s,s+1}}(x) = x_s x_{s+1} - 1 on occupation labels {0, 1}.

    Per leading site there is a single pair with sup|Phi| = 1, so the norm
    is exactly 1 with no remainder.
    """
    vals = np.array([0.0 * 0 - 1, 0 * 1 - 1, 1 * 0 - 1, 1 * 1 - 1])
    terms = [
        InteractionTerm(PairSupport(s, s + 1), 2, 2, vals)
        for s in range(1, site_range + 1)
    ]
    return Interaction(
        d=2,
        terms=tuple(terms),
        norm_remainder=0.0,
        translation_invariant=True,
        label="ising-nn",
    )


def ising_lr(
    alpha: float,
    labels: str = "occupation",
    pair_range: int = 64,
    site_range: int = 32,
) -> Interaction:
    """Two-body chain with couplings decaying like |i-j|**(-alpha).

    labels="occupation": Phi_{{i,j}}(x) = (x_i x_j - 1)/|i-j|^alpha over
    {0,1}; labels="spin": Phi = s_i s_j/|i-j|^alpha with s = 2x - 1.  Both
    have sup|Phi_{{i,j}}| = |i-j|^(-alpha); the two versions differ by
    one-body and constant pieces only, which every kernel absorbs (they
    shift the Hamiltonian by a configuration-independent amount once the
    volume is fixed).

    Needs alpha > 1 for a summable per-site tail; the remainder is the
    integral-enclosure upper bound on sum_{r > pair_range} r^(-alpha).
    """
    if alpha <= 1:
        raise ValueError("alpha must be > 1 for a summable pair tail")
    if labels == "occupation":
        base = np.array([-1.0, -1.0, -1.0, 0.0])
    elif labels == "spin":
        base = np.array([1.0, -1.0, -1.0, 1.0])
    else:
        raise ValueError(f"unknown labels {labels!r}")
    terms = []
    for s in range(1, site_range + 1):
        for r in range(1, pair_range + 1):
            terms.append(
                InteractionTerm(PairSupport(s, s + r), 2, 2, base / float(r) ** alpha)
            )
    remainder = pair_range ** (1.0 - alpha) / (alpha - 1.0)
    return Interaction(
        d=2,
        terms=tuple(terms),
        norm_remainder=remainder,
        translation_invariant=True,
        label=f"ising-lr(alpha={alpha},{labels})",
    )
