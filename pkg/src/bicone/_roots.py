"""Vectorized bisection for increasing scalar maps.

Bisection is deliberately the only root finder used in this package: it is
monotone, branch-free, and bit-reproducible, which matters more here than
iteration counts.  Newton-type methods would stall on the extremely flat
profiles the log-type moduli produce near zero.
"""

from __future__ import annotations

import numpy as np

# Smallest bracket width worth resolving; below this the root is determined
# to within floating-point resolution of the bracket endpoints.
_WIDTH_FLOOR = 1e-320


def bisect_increasing(fn, lo, hi, target, value_tol: float, max_iter: int = 200) -> np.ndarray:
    """Solve fn(x) = target for increasing fn on the bracket [lo, hi].

    All arguments broadcast; the solver runs every lane in lock step and
    freezes lanes as they converge.  A lane stops when the residual
    |fn(mid) - target| drops below value_tol or when the bracket collapses
    to floating-point resolution.  With a valid straddling bracket the result
    is always the best representable answer available at the iteration cap;
    residual tolerances that are unattainable in float64 (value_tol smaller
    than the function's local resolution) degrade gracefully into
    bracket-exhaustion stops rather than errors.  Callers are responsible for
    checking fn(lo) <= target <= fn(hi) beforehand and failing loudly.
    """
    lo = np.array(np.broadcast_to(np.asarray(lo, dtype=float), np.broadcast_shapes(
        np.shape(lo), np.shape(hi), np.shape(target))), dtype=float)
    hi = np.array(np.broadcast_to(np.asarray(hi, dtype=float), lo.shape), dtype=float)
    target = np.broadcast_to(np.asarray(target, dtype=float), lo.shape)

    active = np.ones(lo.shape, dtype=bool)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(fn(mid), dtype=float)
        resid_ok = np.abs(fm - target) <= value_tol
        width_ok = (hi - lo) <= _WIDTH_FLOOR + 4.0 * np.finfo(float).eps * np.abs(hi)
        active = active & ~resid_ok & ~width_ok
        if not active.any():
            break
        go_right = active & (fm < target)
        go_left = active & ~go_right
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_left, mid, hi)
    return 0.5 * (lo + hi)
