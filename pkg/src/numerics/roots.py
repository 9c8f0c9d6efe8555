"""Scalar, planar and complex root finders."""

import cmath
import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize

from src.core.errors import (
    BracketFailure,
    DegenerateDerivative,
    DomainError,
    NoConvergence,
    SolverError,
)
from src.numerics.config import rootDefaults

logger = logging.getLogger(__name__)

_DEFAULTS = rootDefaults()


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
                       max_expansions: int = _DEFAULTS["bracket_expansions"]) -> float:
    """Root of a continuous f by bracketing.

    The bracket width is doubled (lo fixed) until f changes sign; the root is
    then refined with Brent's method to machine resolution.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    expansions = 0
    while np.sign(f_lo) == np.sign(f_hi):
        if expansions >= max_expansions:
            raise BracketFailure(
                f"no sign change on [{lo:.6g}, {hi:.6g}] after {expansions} expansions"
            )
        hi = lo + 2.0 * (hi - lo)
        f_hi = f(hi)
        expansions += 1
    if expansions:
        logger.debug("bracket expanded %d times to [%g, %g]", expansions, lo, hi)
    if f_hi == 0.0:
        return hi

    try:
        root = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    except RuntimeError as exc:
        raise NoConvergence(f"brentq failed on [{lo:.6g}, {hi:.6g}]: {exc}") from exc
    residual = abs(f(root))
    if residual > tol:
        raise NoConvergence(f"root {root!r} leaves residual {residual:.3g} > {tol:.3g}")
    return root


def _norm(values) -> float:
    return float(np.max(np.abs(values)))


def solve_2d(F: Callable[[float, float], Tuple[float, float]], guess: Tuple[float, float],
             tol: float = 1e-10, max_iter: int = _DEFAULTS["solve_2d_max_iter"],
             fd_step: float = _DEFAULTS["fd_step"],
             admissible: Optional[Callable[[float, float], bool]] = None) -> Tuple[float, float]:
    """Damped Newton for a 2x2 system with a forward-difference Jacobian.

    Trial points outside `admissible`, or where F raises a domain/solver error,
    are rejected by the backtracking line search.
    """
    x = np.asarray(guess, dtype=float)
    fx = np.asarray(F(*x), dtype=float)

    def trial(point):
        if admissible is not None and not admissible(*point):
            return None
        try:
            return np.asarray(F(*point), dtype=float)
        except (DomainError, SolverError):
            return None

    for iteration in range(max_iter):
        if _norm(fx) <= tol:
            return float(x[0]), float(x[1])
        jac = np.empty((2, 2))
        for i in range(2):
            h = fd_step * max(1.0, abs(x[i]))
            shifted = x.copy()
            shifted[i] += h
            f_shift = trial(shifted)
            if f_shift is None:
                shifted[i] = x[i] - h
                f_shift = trial(shifted)
                if f_shift is None:
                    raise NoConvergence(f"cannot form a Jacobian at {x}")
                h = -h
            jac[:, i] = (f_shift - fx) / h
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian at {x}") from exc

        lam = 1.0
        while lam >= 1e-6:
            candidate = x + lam * step
            f_candidate = trial(candidate)
            if f_candidate is not None and _norm(f_candidate) < (1.0 - 1e-4 * lam) * _norm(fx):
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search stalled at {x} (|F| = {_norm(fx):.3g})")
        logger.debug("solve_2d iter %d: x=%s |F|=%.3g step=%.3g", iteration, candidate,
                     _norm(f_candidate), lam)
        x, fx = candidate, f_candidate

    if _norm(fx) <= tol:
        return float(x[0]), float(x[1])
    raise NoConvergence(f"solve_2d: |F| = {_norm(fx):.3g} after {max_iter} iterations")


def newton_complex(f: Callable[[complex], complex], df: Callable[[complex], complex],
                   guess: complex, tol: float = 1e-14,
                   max_iter: int = _DEFAULTS["newton_max_iter"],
                   min_derivative: float = 1e-14,
                   admissible: Optional[Callable[[complex], bool]] = None) -> complex:
    """Damped complex Newton iteration; returns s with |f(s)| <= tol."""
    s = complex(guess)
    fs = f(s)
    for _ in range(max_iter):
        if abs(fs) <= tol:
            return s
        d = df(s)
        if not cmath.isfinite(d) or abs(d) < min_derivative:
            raise DegenerateDerivative(f"|f'({s})| = {abs(d):.3g}")
        step = fs / d
        lam = 1.0
        while True:
            candidate = s - lam * step
            f_candidate = None
            if admissible is None or admissible(candidate):
                try:
                    f_candidate = f(candidate)
                except DomainError:
                    f_candidate = None
            if f_candidate is not None and abs(f_candidate) < abs(fs):
                break
            lam *= 0.5
            if lam < 1e-12:
                raise NoConvergence(f"Newton line search stalled at {s} (|f| = {abs(fs):.3g})")
        s, fs = candidate, f_candidate
    if abs(fs) <= tol:
        return s
    raise NoConvergence(f"Newton: |f| = {abs(fs):.3g} after {max_iter} iterations")
