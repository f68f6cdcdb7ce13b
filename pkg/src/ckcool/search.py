"""Scalar bisection and golden-section search."""
import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect(fn, lo, hi, done):
    """Bisection on a sign change of ``fn`` between ``lo`` and ``hi``.

    ``fn(lo)`` and ``fn(hi)`` must have opposite signs (a zero at either end
    is returned directly).  Stops when ``done(lo, hi)`` is true and returns the
    midpoint.
    """
    f_lo = fn(lo)
    if f_lo == 0:
        return lo
    f_hi = fn(hi)
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError("bisect: no sign change in bracket")
    for _ in range(200):
        if done(lo, hi):
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_minimize(fn, a, b, tol):
    """Minimum of a unimodal ``fn`` on [a, b] to an interval width of ``tol``.

    Returns ``(x_min, f_min)``.
    """
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while abs(b - a) > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 < f2 else (x2, f2)
