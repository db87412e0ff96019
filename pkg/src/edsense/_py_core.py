"""Fallback quadrature core built on scipy's QUADPACK bindings.

Evaluates the exponentially scaled tail integral

    eig_scaled(alpha, x, b) = exp(x) * integral_x^inf t^(alpha-1) exp(-t - b/t) dt

which stays O(1) even when x is large (the unscaled integral underflows and
its exp(x) prefactor overflows).  The range is split at max(x, 1 + sqrt(b)),
near the integrand's peak (pushed out to b/(1 - alpha) for alpha < 1 so the
transformed tail stays monotone), and the tail is mapped onto [0, 1) with
t = s - log(1 - w) so the exponential decay is absorbed analytically.
"""

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import ConvergenceError

BACKEND_NAME = "python"


def _head(t, alpha, x, b):
    # t^(alpha-1) exp(-(t-x) - b/t), safe for t >= x > 0
    return t ** (alpha - 1.0) * math.exp(x - t - b / t)


def _tail(w, alpha, split, x, b):
    # after t = split - log(1-w):  f(t) dt = t^(alpha-1) exp(-b/t) exp(x-split) dw
    # clamp w: an endpoint-rounded node at w = 1 would give t = inf
    if w >= 1.0:
        w = 0.9999999999999999
    t = split - math.log1p(-w)
    return t ** (alpha - 1.0) * math.exp(x - split - b / t)


def eig_scaled(alpha, x, b, rel_tol, abs_tol, max_subdivisions):
    split = max(x, 1.0 + math.sqrt(b))
    if alpha < 1.0:
        # keep the transformed tail monotone when the turnover point is in
        # the live range; see the matching note in the compiled core (mass
        # otherwise hides at w -> 1 for alpha < 1)
        t_mono = b / (1.0 - alpha)
        if split < t_mono < split + 750.0:
            split = t_mono
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if split > x:
            # seed a break point at the interior peak t = sqrt(b) when present
            # (QUADPACK needs the subdivision limit to exceed the break count)
            peak = math.sqrt(b)
            pts = [peak] if x < peak < split and max_subdivisions >= 2 else None
            val, e = integrate.quad(
                _head, x, split, args=(alpha, x, b),
                epsabs=0.5 * abs_tol, epsrel=rel_tol,
                limit=max_subdivisions, points=pts,
            )
            total += val
            err += e
        val, e = integrate.quad(
            _tail, 0.0, 1.0, args=(alpha, split, x, b),
            epsabs=0.5 * abs_tol, epsrel=rel_tol, limit=max_subdivisions,
        )
        total += val
        err += e
    # QUADPACK cannot certify much below ~1e-11 relative (roundoff in its
    # own error estimate), so requests tighter than that are accepted at the
    # practical floor rather than failed; realized accuracy is typically far
    # better than the reported estimate
    ok = max(rel_tol * abs(total) * 10.0, 3e-11 * abs(total), abs_tol)
    if not math.isfinite(total) or err > ok:
        raise ConvergenceError(
            f"tail integral did not converge (alpha={alpha}, x={x}, b={b}: "
            f"value={total!r}, err={err!r})"
        )
    return total


def eig_scaled_batch(alpha, x, b, rel_tol, abs_tol, max_subdivisions):
    """Vector form; abs_tol may be a scalar or one value per integral."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    tol = np.broadcast_to(np.asarray(abs_tol, dtype=float), alpha.shape)
    out = np.empty(alpha.shape, dtype=float)
    for i in range(alpha.size):
        out.flat[i] = eig_scaled(
            alpha.flat[i], x.flat[i], b.flat[i], rel_tol, tol.flat[i],
            max_subdivisions,
        )
    return out
