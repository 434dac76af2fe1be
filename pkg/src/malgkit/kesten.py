"""Spectral bounds for the simple random walk on the free group of rank 2.

The Markov operator ``M = (π(a) + π(a⁻¹) + π(b) + π(b⁻¹)) / 4`` has norm
``√3/2`` on the full regular representation.  For a unit vector ξ,

    ½(‖π(a)ξ − ξ‖² + ‖π(b)ξ − ξ‖²) = 2 − 2⟨Mξ, ξ⟩ ≥ 2 − √3,

so one of the two generators moves ξ by at least ``√(2 − √3)``.  Here the
operator is truncated to balls, its top eigenvalue is found by power
iteration, and return probabilities are computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .freegroup import (BALL_CAP, Ball, SparseOperator, ball_size, check_radius, generator_operator,
                        markov_operator)

SPECTRAL_RADIUS = math.sqrt(3) / 2
DISPLACEMENT_SQ = 2 - math.sqrt(3)
DISPLACEMENT = math.sqrt(2 - math.sqrt(3))
MAX_STEPS = 40


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, estimate: float, iterations: int):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = iterations


def return_probability(steps: int) -> Fraction:
    """Exact probability that the simple random walk is back at e after ``steps`` steps.

    The distance from the identity is itself a Markov chain: from 0 it moves
    to 1; from d ≥ 1 it moves to d − 1 with probability 1/4 and to d + 1
    with probability 3/4.  Odd step counts give 0.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if steps > MAX_STEPS:
        raise ValueError(f"steps {steps} over cap {MAX_STEPS}")
    if steps % 2:
        return Fraction(0)
    dist = [Fraction(1)]
    q, p = Fraction(1, 4), Fraction(3, 4)
    for _ in range(steps):
        nxt = [Fraction(0)] * (len(dist) + 1)
        for d, w in enumerate(dist):
            if not w:
                continue
            if d == 0:
                nxt[1] += w
            else:
                nxt[d - 1] += q * w
                nxt[d + 1] += p * w
        dist = nxt
    return dist[0]


@dataclass
class EigenResult:
    value: float
    iterations: int
    vector: np.ndarray = field(repr=False)


def power_iteration(op: SparseOperator, tol: float = 1e-9, max_iters: int = 100_000) -> EigenResult:
    """Top eigenvalue of a symmetric non-negative operator, started at the first basis vector.

    Iterates the lazy operator ``(I + M)/2`` so that bipartite spectra
    (λ and −λ both present) do not stall the iteration, and reports the
    Rayleigh quotient of M.  Stops when successive unit iterates differ by
    less than ``tol`` in norm; the eigenvalue error is then of order tol².
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not op.symmetric:
        raise ValueError("power iteration needs an operator flagged symmetric")
    A = op.to_scipy()
    x = np.zeros(op.dim)
    x[0] = 1.0
    lam = 0.0
    for it in range(1, max_iters + 1):
        Ax = A @ x
        lam = float(x @ Ax)
        y = 0.5 * (x + Ax)
        norm = np.linalg.norm(y)
        if norm == 0:
            return EigenResult(0.0, it, x)
        y /= norm
        if np.linalg.norm(y - x) < tol:
            return EigenResult(float(y @ (A @ y)), it, y)
        x = y
    raise ConvergenceError(f"no convergence in {max_iters} iterations", lam, max_iters)


def top_eigenvalue(op: SparseOperator, tol: float = 1e-9, max_iters: int = 100_000) -> float:
    return power_iteration(op, tol, max_iters).value


def displacements(xi: np.ndarray, R: int) -> tuple[float, float]:
    """``(‖π(a)ξ − ξ‖, ‖π(b)ξ − ξ‖)`` in ℓ² of the whole group, for ξ supported in the R-ball."""
    check_radius(R)
    if len(xi) != ball_size(R):
        raise ValueError(f"vector has length {len(xi)}, the {R}-ball has {ball_size(R)} words")
    big = Ball(R + 1, cap=BALL_CAP + 1)
    pad = np.zeros(big.dim)
    pad[:len(xi)] = xi
    out = []
    for g in "ab":
        moved = generator_operator(g, R + 1, big).to_scipy() @ pad
        out.append(float(np.linalg.norm(moved - pad)))
    return out[0], out[1]


def average_displacement_sq(xi: np.ndarray, R: int) -> float:
    da, db = displacements(xi, R)
    return 0.5 * (da * da + db * db)


@dataclass
class KestenReport:
    R: int
    lambda_max: float
    min_avg_disp_sq: float
    iterations: int
    tol: float
    return_probs: list[Fraction]
    target_lambda: float = SPECTRAL_RADIUS
    target_disp_sq: float = DISPLACEMENT_SQ
    target_disp: float = DISPLACEMENT

    @property
    def lambda_ok(self) -> bool:
        return self.lambda_max <= SPECTRAL_RADIUS + self.tol

    @property
    def displacement_ok(self) -> bool:
        return self.min_avg_disp_sq >= DISPLACEMENT_SQ - self.tol

    @property
    def min_max_displacement(self) -> float:
        """Lower bound on max(‖π(a)ξ − ξ‖, ‖π(b)ξ − ξ‖) over unit ξ in the ball."""
        return math.sqrt(max(self.min_avg_disp_sq, 0.0))


def kesten_certificate(R: int, tol: float = 1e-9, max_iters: int = 100_000,
                       max_steps: int = MAX_STEPS) -> KestenReport:
    """Top eigenvalue of M_R and the displacement bound ``2 − 2λ`` it certifies on the R-ball."""
    check_radius(R)
    res = power_iteration(markov_operator(R), tol, max_iters)
    probs = [return_probability(s) for s in range(2, max_steps + 1, 2)]
    return KestenReport(R, res.value, 2 - 2 * res.value, res.iterations, tol, probs)


@dataclass
class ProbeResult:
    R: int
    best_max_displacement: float
    avg_lower_bound: float
    steps: int


def displacement_probe(R: int, seed: int = 0, steps: int = 200, scale: float = 0.05) -> ProbeResult:
    """Seeded local search for a unit vector with small max generator displacement.

    Starts from the top eigenvector of M_R and accepts random perturbations
    that lower ``max(‖π(a)ξ − ξ‖, ‖π(b)ξ − ξ‖)``.  The result is an upper
    bound on the minimax displacement over the ball, not a certificate.
    """
    check_radius(R)
    rng = np.random.default_rng(seed)
    res = power_iteration(markov_operator(R))
    xi = res.vector

    def score(v):
        return max(displacements(v, R))

    best = score(xi)
    for _ in range(steps):
        cand = xi + scale * rng.standard_normal(len(xi)) * np.abs(xi).max()
        cand /= np.linalg.norm(cand)
        s = score(cand)
        if s < best:
            xi, best = cand, s
    return ProbeResult(R, best, math.sqrt(max(2 - 2 * res.value, 0.0)), steps)
