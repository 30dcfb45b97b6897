"""Revival-time prediction and detection.

A joint phase revival needs every dynamical phase
exp(-i [kappa n(n-1) + xi n m] t) to return to unity simultaneously.
Since n(n-1) is always even, the collision part rephases whenever
kappa t is a multiple of pi, and the cross-Kerr part whenever xi t is a
multiple of 2 pi; a common time exists iff xi / kappa is rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .dynamics import ModelParams


def collision_revival_time(kappa: float) -> float:
    """Collision-driven revival time pi / kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    return math.pi / kappa


def light_revival_time(params: ModelParams) -> float:
    """Light-driven revival time 2 pi delta / |g1|^2."""
    if params.g1 == 0:
        raise ValueError("g1 must be nonzero")
    return 2.0 * math.pi / params.xi


@dataclass(frozen=True)
class RevivalPrediction:
    """Commensurability verdict: first joint revival time, if one exists."""

    exists: bool
    time: float | None = None
    ratio: Fraction | None = None


def joint_revival(ratio: Fraction, kappa: float) -> RevivalPrediction:
    """First common revival for a rational ratio = xi / kappa = p / q.

    Both phase families rephase together at the smallest t with
    kappa t = j pi and xi t = 2 pi k; coprimality gives j = 2q for odd p
    and j = q for even p, so

        t_rev = 2 q t_rev^C   (p odd)      t_rev = q t_rev^C   (p even).

    For p in {1, 2} this coincides with the reduced form
    2 (q/p) t_rev^C; for larger p that reduced form is NOT a revival
    (e.g. p/q = 3: phases misalign at (2/3) t_rev^C, the true first
    revival is 2 t_rev^C), which the phase-alignment test pins down.
    A zero ratio means no cross-Kerr coupling: every multiple of
    t_rev^C is a collision revival.
    """
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    ratio = Fraction(ratio)
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    t_c = collision_revival_time(kappa)
    if ratio == 0:
        return RevivalPrediction(exists=True, time=t_c, ratio=Fraction(0, 1))
    p, q = ratio.numerator, ratio.denominator
    j = q if p % 2 == 0 else 2 * q
    return RevivalPrediction(exists=True, time=j * t_c, ratio=ratio)


def best_rational(x: float, max_den: int, tol: float) -> Fraction | None:
    """Best continued-fraction convergent p/q of x with q <= max_den.

    Returns the convergent iff it lands within tol of x, else None.
    Note that floats are rationals: for generic x the best convergent
    under a 1e6 denominator cap typically sits within ~1e-12, so
    classifying a ratio as irrational must be an explicit declaration
    rather than a float heuristic.
    """
    if x <= 0:
        raise ValueError("x must be > 0")
    p0, q0, p1, q1 = 1, 0, math.floor(x), 1
    best: Fraction | None = Fraction(p1, q1) if q1 <= max_den else None
    frac = x - math.floor(x)
    while frac > 0:
        y = 1.0 / frac
        a = math.floor(y)
        frac = y - a
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > max_den:
            break
        cand = Fraction(p1, q1)
        if best is None or abs(x - cand) < abs(x - best):
            best = cand
    if best is not None and abs(x - best) <= tol:
        return best
    return None


def detect_revivals(
    series: list[tuple[float, float]], threshold: float
) -> list[float]:
    """Times of variance minima below an absolute threshold.

    One detection per contiguous below-threshold run; within a run the
    minimum-value point wins, ties going to the earliest time.  The
    series must be sorted by time.
    """
    if not series:
        raise ValueError("series is empty")
    times = [t for t, _ in series]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("series must be sorted by time")
    detections: list[float] = []
    run_best: tuple[float, float] | None = None  # (value, time)
    for t, v in series:
        if v <= threshold:
            if run_best is None or v < run_best[0]:
                run_best = (v, t)
        elif run_best is not None:
            detections.append(run_best[1])
            run_best = None
    if run_best is not None:
        detections.append(run_best[1])
    return detections
