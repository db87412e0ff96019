# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled quadrature core.

Same contract as edsense._py_core: the exponentially scaled tail integral

    eig_scaled(alpha, x, b) = exp(x) * integral_x^inf t^(alpha-1) exp(-t - b/t) dt

evaluated by adaptive Gauss-Kronrod 7/15.  The range splits at
max(x, 1 + sqrt(b)), pushed out to the monotonicity point b/(1 - alpha) for
alpha < 1 (see _eig_scaled_core); the head is integrated in t, the tail after
the exponential substitution t = split - log(1 - w) that absorbs the decay.
Both pieces share one worst-panel-first refinement loop and one subdivision
budget.
"""

from libc.math cimport exp, fabs, fmax, isfinite, log1p, pow, sqrt

import numpy as np

from .errors import ConvergenceError

BACKEND_NAME = "ext"

# Kronrod-15 nodes on [-1, 1] and weights; first 4 entries (even indices of
# the positive nodes plus 0) carry the embedded Gauss-7 rule.
cdef double[15] K_NODE
cdef double[15] K_W
cdef double[15] G_W

K_NODE[0] = 0.0
K_NODE[1] = 0.207784955007898; K_NODE[2] = -0.207784955007898
K_NODE[3] = 0.405845151377397; K_NODE[4] = -0.405845151377397
K_NODE[5] = 0.586087235467691; K_NODE[6] = -0.586087235467691
K_NODE[7] = 0.741531185599394; K_NODE[8] = -0.741531185599394
K_NODE[9] = 0.864864423359769; K_NODE[10] = -0.864864423359769
K_NODE[11] = 0.949107912342759; K_NODE[12] = -0.949107912342759
K_NODE[13] = 0.991455371120813; K_NODE[14] = -0.991455371120813

K_W[0] = 0.209482141084728
K_W[1] = 0.204432940075298; K_W[2] = 0.204432940075298
K_W[3] = 0.190350578064785; K_W[4] = 0.190350578064785
K_W[5] = 0.169004726639267; K_W[6] = 0.169004726639267
K_W[7] = 0.140653259715525; K_W[8] = 0.140653259715525
K_W[9] = 0.104790010322250; K_W[10] = 0.104790010322250
K_W[11] = 0.063092092629979; K_W[12] = 0.063092092629979
K_W[13] = 0.022935322010529; K_W[14] = 0.022935322010529

G_W[0] = 0.417959183673469
G_W[1] = 0.0; G_W[2] = 0.0
G_W[3] = 0.381830050505119; G_W[4] = 0.381830050505119
G_W[5] = 0.0; G_W[6] = 0.0
G_W[7] = 0.279705391489277; G_W[8] = 0.279705391489277
G_W[9] = 0.0; G_W[10] = 0.0
G_W[11] = 0.129484966168870; G_W[12] = 0.129484966168870
G_W[13] = 0.0; G_W[14] = 0.0

DEF MAX_PANELS = 1024


cdef inline double _head_f(double t, double alpha, double x, double b) nogil:
    # t^(alpha-1) exp(-(t-x) - b/t)
    return pow(t, alpha - 1.0) * exp(x - t - b / t)


cdef inline double _tail_f(double w, double alpha, double split, double x,
                           double b) nogil:
    # t = split - log(1-w);  f(t) dt = t^(alpha-1) exp(-b/t) exp(x-split) dw
    # deep subdivision can round a node onto w = 1 exactly; clamp to the
    # largest double below 1 (the lost tail mass is ~exp(-36.7) relative)
    if w >= 1.0:
        w = 0.9999999999999999
    cdef double t = split - log1p(-w)
    return pow(t, alpha - 1.0) * exp(x - split - b / t)


cdef inline void _gk_panel(int seg, double lo, double hi, double alpha,
                           double split, double x, double b,
                           double* out_val, double* out_err) nogil:
    cdef double mid = 0.5 * (lo + hi)
    cdef double half = 0.5 * (hi - lo)
    cdef double acc_k = 0.0
    cdef double acc_g = 0.0
    cdef double resabs = 0.0
    cdef double t, f
    cdef int i
    for i in range(15):
        t = mid + half * K_NODE[i]
        if seg == 0:
            f = _head_f(t, alpha, x, b)
        else:
            f = _tail_f(t, alpha, split, x, b)
        acc_k += K_W[i] * f
        acc_g += G_W[i] * f
        resabs += K_W[i] * fabs(f)
    out_val[0] = acc_k * half
    resabs *= half
    # raw |K - G| as the panel error: the usual sharpened estimate can accept
    # slowly-varying low-magnitude panels whose true error still matters once
    # multiplied by large assembly weights, so stay conservative; the floor
    # keeps roundoff from demanding impossible refinement
    cdef double err = fabs(acc_k - acc_g) * half
    if resabs > 2.3e-308 / (50.0 * 2.220446049250313e-16):
        err = fmax(err, 50.0 * 2.220446049250313e-16 * resabs)
    out_err[0] = err


cdef int _eig_scaled_core(double alpha, double x, double b, double rel_tol,
                          double abs_tol, int max_subdivisions,
                          double* result) nogil:
    # tail handoff point: beyond it the transformed integrand must be
    # monotone in w, otherwise its mass can hide exponentially close to
    # w = 1 where no quadrature node reaches.  The scaled integrand is
    # t^(alpha-1) exp(-(t-x) - b/t), whose w-space log-slope is
    # (alpha-1)/t + b/t^2: nonpositive for t >= b/(1-alpha) when alpha < 1.
    # Extend only when that point is within the live exp(-(t-x)) range;
    # farther out the residual hump is suppressed below double precision.
    cdef double split = fmax(x, 1.0 + sqrt(b))
    cdef double t_mono
    if alpha < 1.0:
        t_mono = b / (1.0 - alpha)
        if t_mono > split and t_mono - split < 750.0:
            split = t_mono
    cdef double[MAX_PANELS] p_lo
    cdef double[MAX_PANELS] p_hi
    cdef double[MAX_PANELS] p_val
    cdef double[MAX_PANELS] p_err
    cdef int[MAX_PANELS] p_seg
    cdef int n_panels = 0
    cdef int budget = max_subdivisions
    if budget > MAX_PANELS - 2:
        budget = MAX_PANELS - 2

    cdef double peak = sqrt(b)
    cdef double v, e
    cdef double edges[4]
    cdef int n_edges = 0
    cdef double lo2, hi2, m2
    cdef int k
    # head panels in t-space, split at the interior peak when present
    if split > x:
        edges[n_edges] = x; n_edges += 1
        if x < peak < split:
            edges[n_edges] = peak; n_edges += 1
        edges[n_edges] = split; n_edges += 1
        # every seed panel is pre-bisected: a single 15-point rule can agree
        # with its embedded 7-point rule while both miss the integral, and
        # the error estimate only becomes trustworthy across two scales
        for k in range(n_edges - 1):
            lo2 = edges[k]; hi2 = edges[k + 1]
            m2 = 0.5 * (lo2 + hi2)
            _gk_panel(0, lo2, m2, alpha, split, x, b, &v, &e)
            p_lo[n_panels] = lo2; p_hi[n_panels] = m2
            p_val[n_panels] = v; p_err[n_panels] = e; p_seg[n_panels] = 0
            n_panels += 1
            _gk_panel(0, m2, hi2, alpha, split, x, b, &v, &e)
            p_lo[n_panels] = m2; p_hi[n_panels] = hi2
            p_val[n_panels] = v; p_err[n_panels] = e; p_seg[n_panels] = 0
            n_panels += 1
    # tail panels in w-space, likewise pre-bisected
    _gk_panel(1, 0.0, 0.5, alpha, split, x, b, &v, &e)
    p_lo[n_panels] = 0.0; p_hi[n_panels] = 0.5
    p_val[n_panels] = v; p_err[n_panels] = e; p_seg[n_panels] = 1
    n_panels += 1
    _gk_panel(1, 0.5, 1.0, alpha, split, x, b, &v, &e)
    p_lo[n_panels] = 0.5; p_hi[n_panels] = 1.0
    p_val[n_panels] = v; p_err[n_panels] = e; p_seg[n_panels] = 1
    n_panels += 1

    cdef double total, err_sum, worst, mid
    cdef int i, worst_i, seg
    cdef int splits = 0
    while True:
        total = 0.0
        err_sum = 0.0
        worst = -1.0
        worst_i = 0
        for i in range(n_panels):
            total += p_val[i]
            err_sum += p_err[i]
            if p_err[i] > worst:
                worst = p_err[i]
                worst_i = i
        if not isfinite(total):
            return 2
        if err_sum <= fmax(rel_tol * fabs(total), abs_tol):
            result[0] = total
            return 0
        if splits >= budget or n_panels >= MAX_PANELS:
            return 1
        seg = p_seg[worst_i]
        mid = 0.5 * (p_lo[worst_i] + p_hi[worst_i])
        if mid <= p_lo[worst_i] or mid >= p_hi[worst_i]:
            return 1  # interval exhausted at double precision
        _gk_panel(seg, p_lo[worst_i], mid, alpha, split, x, b, &v, &e)
        p_lo[n_panels] = p_lo[worst_i]; p_hi[n_panels] = mid
        p_val[n_panels] = v; p_err[n_panels] = e; p_seg[n_panels] = seg
        _gk_panel(seg, mid, p_hi[worst_i], alpha, split, x, b, &v, &e)
        p_lo[worst_i] = mid
        p_val[worst_i] = v; p_err[worst_i] = e
        n_panels += 1
        splits += 1


def eig_scaled(double alpha, double x, double b, double rel_tol,
               double abs_tol, int max_subdivisions):
    cdef double out = 0.0
    cdef int status = _eig_scaled_core(alpha, x, b, rel_tol, abs_tol,
                                       max_subdivisions, &out)
    if status != 0:
        raise ConvergenceError(
            f"tail integral did not converge (alpha={alpha}, x={x}, b={b}, "
            f"status={status})"
        )
    return out


def eig_scaled_batch(alpha, x, b, double rel_tol, abs_tol,
                     int max_subdivisions):
    """Vector form; abs_tol may be a scalar or one value per integral."""
    cdef const double[::1] a_v = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] x_v = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] b_v = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = a_v.shape[0]
    cdef const double[::1] t_v = np.ascontiguousarray(
        np.broadcast_to(np.asarray(abs_tol, dtype=np.float64), (n,))
    )
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o_v = out
    cdef Py_ssize_t i
    cdef int status = 0
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            status = _eig_scaled_core(a_v[i], x_v[i], b_v[i], rel_tol,
                                      t_v[i], max_subdivisions, &o_v[i])
            if status != 0:
                bad = i
                break
    if bad >= 0:
        raise ConvergenceError(
            f"tail integral did not converge (alpha={a_v[bad]}, x={x_v[bad]}, "
            f"b={b_v[bad]}, status={status})"
        )
    return out
