"""Transfer operator at finite cylinder depth and its leading eigendata.

For a potential f the operator acts on functions by
(L_f g)(x) = sum over one-step preimages a.x of exp(f(a.x)) g(a.x).
Restricted to depth-m tables it becomes a d**m x d**m matrix with d
positive entries per row: the weight of row w and preimage symbol a is
exp(f(a w_1 ... w_m tail...)), where the potential is truncated at depth
m+1 with a fixed reference tail (all-zero by default).  The truncation is
exact for locally-constant potentials of depth <= m+1.

power_iterate computes the leading eigenvalue lambda, the positive
eigenfunction psi, and the eigenprobability nu of the adjoint, with the
normalisations nu(whole space) = 1 and integral of psi against nu = 1.
The iteration starts from the constant function / uniform measure
(deterministic), renormalises every step, and stops when both sup-norm
residuals fall under tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .potentials import Potential, truncate
from .shift import (
    CylinderFunction,
    CylinderMeasure,
    Point,
    check_table_size,
    integrate,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class TransferOperator:
    """Depth-m matrix form of L_f (weights laid out per preimage symbol).

    weights[a, i] multiplies the value of the argument at the child word
    (a, w_1, ..., w_{m-1}) when producing the output at word w = index i.
    """

    d: int
    depth: int
    weights: np.ndarray        # shape (d, d**depth), strictly positive
    truncation_bound: float    # certified bound on the dropped tail-dependence

    @property
    def size(self) -> int:
        return self.d ** self.depth

    def apply(self, values: np.ndarray) -> np.ndarray:
        """One application of L_f to a depth-m value table."""
        d, m = self.d, self.depth
        child_base = d ** (m - 1)
        parent = np.arange(self.size) // d
        out = np.zeros(self.size)
        for a in range(d):
            out += self.weights[a] * values[a * child_base + parent]
        return out

    def dual_apply(self, weights: np.ndarray) -> np.ndarray:
        """One application of the adjoint to a depth-m weight table."""
        d, m = self.d, self.depth
        child_base = d ** (m - 1)
        parent = np.arange(self.size) // d
        out = np.zeros(self.size)
        for a in range(d):
            np.add.at(out, a * child_base + parent, self.weights[a] * weights)
        return out

    def matrix(self) -> np.ndarray:
        """Dense d**m x d**m matrix (small depths only)."""
        if self.size ** 2 > 2 ** 22:
            raise ValueError("dense matrix would exceed the size guard")
        d, m = self.d, self.depth
        child_base = d ** (m - 1)
        mat = np.zeros((self.size, self.size))
        parent = np.arange(self.size) // d
        for a in range(d):
            mat[np.arange(self.size), a * child_base + parent] += self.weights[a]
        return mat


def transfer_operator(
    f: Potential, depth: int, tail: Point | None = None
) -> TransferOperator:
    """Build the depth-m operator from the depth-(m+1) truncation of f."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    check_table_size(f.d, depth + 1)
    table, bound = truncate(f, depth + 1, tail)
    # extended word (a, w) has index a * d**m + index(w): reshape splits off a.
    weights = np.exp(table.values.reshape(f.d, f.d ** depth))
    return TransferOperator(f.d, depth, weights, bound)


def apply(f: Potential, g: CylinderFunction, depth: int) -> CylinderFunction:
    """One application of L_f to g, returned at the given depth."""
    if g.depth > depth:
        raise ValueError(f"argument depth {g.depth} exceeds operator depth {depth}")
    op = transfer_operator(f, depth)
    return CylinderFunction(f.d, depth, op.apply(g.refine(depth).values))


def dual_apply(f: Potential, mu: CylinderMeasure, depth: int) -> CylinderMeasure:
    """One application of the adjoint to mu (unnormalised mass vector)."""
    if mu.depth != depth:
        raise ValueError(f"measure depth {mu.depth} does not match {depth}")
    op = transfer_operator(f, depth)
    return CylinderMeasure(f.d, depth, op.dual_apply(mu.weights))


def eigen_residual(op: TransferOperator, lam: float, values: np.ndarray) -> float:
    """Relative eigen-residual  ||L psi - lambda psi||_inf / (lambda ||psi||_inf)."""
    return float(
        np.max(np.abs(op.apply(values) - lam * values))
        / (lam * np.max(np.abs(values)))
    )


def dual_eigen_residual(op: TransferOperator, lam: float, weights: np.ndarray) -> float:
    """Relative adjoint residual in total variation."""
    return float(
        np.sum(np.abs(op.dual_apply(weights) - lam * weights))
        / (lam * np.sum(np.abs(weights)))
    )


@dataclass(frozen=True)
class RPFData:
    """Leading eigendata of the depth-m transfer operator.

    lam > 0 is simple and equals the spectral radius (the matrix is
    entrywise positive); psi > 0 with integral 1 against nu; nu has total
    mass 1.  log_lam is the finite-depth pressure.
    """

    d: int
    depth: int
    lam: float
    log_lam: float
    psi: CylinderFunction
    nu: CylinderMeasure
    residual_fn: float
    residual_meas: float
    iterations: int
    converged: bool


def power_iterate(
    f: Potential,
    depth: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    tail: Point | None = None,
) -> RPFData:
    """Leading eigentriple (lambda, psi, nu) by two-sided power iteration.

    Entrywise positivity makes the iteration a contraction in the Hilbert
    projective metric, so the deterministic all-ones start converges for
    every potential; lambda is read off the generalized Rayleigh quotient
    <nu, L psi> / <nu, psi> which is exact at the fixed point.
    """
    op = transfer_operator(f, depth, tail)
    size = op.size
    psi = np.ones(size)
    nu = np.full(size, 1.0 / size)
    lam = 1.0
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        psi_new = op.apply(psi)
        nu_new = op.dual_apply(nu)
        lam = float(np.dot(nu, psi_new) / np.dot(nu, psi))
        psi = psi_new / np.max(psi_new)
        nu = nu_new / np.sum(nu_new)
        res_psi = eigen_residual(op, lam, psi)
        res_nu = dual_eigen_residual(op, lam, nu)
        if max(res_psi, res_nu) < tol:
            converged = True
            break
    nu_measure = CylinderMeasure(f.d, depth, nu)
    psi_fn = CylinderFunction(f.d, depth, psi)
    scale = integrate(nu_measure, psi_fn)
    psi_fn = psi_fn.map(lambda v: v / scale)
    return RPFData(
        d=f.d,
        depth=depth,
        lam=lam,
        log_lam=math.log(lam),
        psi=psi_fn,
        nu=nu_measure,
        residual_fn=eigen_residual(op, lam, psi_fn.values),
        residual_meas=res_nu,
        iterations=iterations,
        converged=converged,
    )


def pressure(
    f: Potential,
    depth: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """log lambda at the given depth."""
    return power_iterate(f, depth, tol, max_iter).log_lam


def normalize(f: Potential, rpf: RPFData, tail: Point | None = None) -> Potential:
    """The normalised potential  f + log psi - log psi o sigma - log lambda.

    rpf must be eigendata of f (power_iterate at some depth m); the result
    is a locally-constant potential of depth m+1 whose transfer operator
    fixes the constants up to the eigen-residual.  Inputs that are not
    locally constant of depth <= m+1 get their depth-(m+1) truncation
    normalised.
    """
    if rpf.d != f.d:
        raise ValueError("alphabet mismatch between potential and eigendata")
    if np.min(rpf.psi.values) <= 0.0:
        raise ValueError("eigenfunction must be strictly positive")
    depth = rpf.depth
    table, _ = truncate(f, depth + 1, tail)
    dm = f.d ** depth
    idx = np.arange(f.d ** (depth + 1))
    log_psi = np.log(rpf.psi.values)
    vals = table.values + log_psi[idx // f.d] - log_psi[idx % dm] - rpf.log_lam
    return Potential.from_table(
        f.d, depth + 1, vals, label=(f.label + "~normalised") if f.label else "normalised"
    )


def check_normalized(fbar: Potential, depth: int) -> float:
    """sup |L_fbar 1 - 1| over the depth-m words."""
    op = transfer_operator(fbar, depth)
    return float(np.max(np.abs(op.apply(np.ones(op.size)) - 1.0)))


def iterate_to_fixed_point(
    fbar: Potential, g: CylinderFunction, depth: int, n: int
) -> CylinderFunction:
    """The n-th iterate of L_fbar on g at the given depth.

    For a normalised potential the iterates squeeze onto the constant
    equal to the integral of g against the invariant measure; compare the
    oscillation of the returns at increasing n to watch the collapse.
    """
    op = transfer_operator(fbar, depth)
    values = g.refine(depth).values.copy()
    for _ in range(n):
        values = op.apply(values)
    return CylinderFunction(fbar.d, depth, values)


def dual_T_iterate(
    f: Potential, mu0: CylinderMeasure, depth: int, steps: int
) -> tuple[CylinderMeasure, float]:
    """Iterate mu -> (adjoint L_f mu) / total mass, from mu0.

    Returns the final measure and the mass picked up in the last step,
    which estimates lambda once the iteration has settled.
    """
    if mu0.d != f.d or mu0.depth != depth:
        raise ValueError("starting measure must live on the iteration depth")
    op = transfer_operator(f, depth)
    mu = mu0.normalized().weights
    lam = 1.0
    for _ in range(steps):
        nxt = op.dual_apply(mu)
        lam = float(nxt.sum())
        mu = nxt / lam
    return CylinderMeasure(f.d, depth, mu), lam
