"""Closed-form detection and false-alarm probabilities.

The energy statistic conditioned on channel gains and occupancy is a scaled
chi-square; averaging over the fading mixture turns its CDF into a finite sum
of scaled tail integrals (``ext_inc_gamma``).  This module assembles those
sums, mixes them over occupancy priors, and inverts the false-alarm curve for
threshold selection.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConditioningError, ConvergenceError, DomainError
from .gamma_mixture import GammaMixture, XiTable, xi_coefficients
from .scenario import PuProfile, Scenario, active_mixture, enumerate_occupancies
from .specfun import DEFAULT_QUADRATURE, QuadratureSettings, reg_lower_gamma
from ._backend import eig_scaled_batch


@dataclass(frozen=True)
class EnergyThreshold:
    """Decision threshold, same units as the per-sample energy statistic."""

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise DomainError(f"threshold must be finite and nonnegative, got {self.gamma!r}")

    def __float__(self) -> float:
        return self.gamma


@dataclass(frozen=True)
class SensingProbabilities:
    p_fa: float
    p_d: float

    def __post_init__(self):
        for name, v in (("p_fa", self.p_fa), ("p_d", self.p_d)):
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")


def _as_gamma(gamma) -> float:
    g = float(gamma)
    if not (math.isfinite(g) and g >= 0.0):
        raise DomainError(f"threshold must be finite and nonnegative, got {gamma!r}")
    return g


def _clamp01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def _survival_sum(alphas, x0s, betas, weights, settings: QuadratureSettings,
                  rel_hint: float | None = None) -> tuple[float, float]:
    """Weighted sum of scaled tail integrals with cancellation control.

    The closed-form survival probabilities are alternating sums whose terms
    can dwarf the result (close scales, large thresholds).  The integrals are
    evaluated at the requested tolerance (or a caller-remembered tighter
    ``rel_hint``); if the realized term mass would amplify that tolerance past
    the target accuracy, they are re-evaluated tighter.  The absolute floor is
    split across terms by weight so its total contribution stays within
    abs_tol.  Returns (sum, relative tolerance actually used).
    """
    weights = np.asarray(weights, dtype=float)
    # per-term absolute floors sized so the weighted total stays within abs_tol
    n = max(weights.size, 1)
    abs_each = np.minimum(
        0.1, settings.abs_tol / (n * np.maximum(np.abs(weights), 1e-30))
    )
    rel = settings.rel_tol if rel_hint is None else min(rel_hint, settings.rel_tol)
    budget = settings.max_subdivisions if rel_hint is None else 2 * settings.max_subdivisions
    tails = eig_scaled_batch(alphas, x0s, betas, rel, abs_each, budget)
    terms = tails * weights
    mass = float(np.abs(terms).sum())
    target = max(4.0 * settings.rel_tol, settings.abs_tol)
    if rel * mass > target:
        rel = max(target / mass, 1e-13)
        tails = eig_scaled_batch(
            alphas, x0s, betas, rel, abs_each, 2 * settings.max_subdivisions
        )
        terms = tails * weights
        mass = float(np.abs(terms).sum())
    # rounding in the cancelling terms floors the achievable absolute error at
    # ~mass*eps; past that the digits of a probability are gone (this happens
    # when the noise floor dwarfs every active link, offset >> shape*scale)
    if mass * 2.3e-16 > 1e-6:
        raise ConditioningError(
            "closed-form expansion loses double precision for these "
            f"parameters (cancelling term mass {mass:.3e})"
        )
    return float(terms.sum()), rel


def cdf_given_sigma(x: float, sigma2: float, ns: int) -> float:
    """CDF of the energy statistic for a known per-component variance.

    The statistic times ns/sigma2 is chi-square with 2*ns degrees of freedom.
    """
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be positive, got {sigma2!r}")
    if int(ns) != ns or ns < 1:
        raise DomainError(f"ns must be a positive integer, got {ns!r}")
    if x < 0.0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    return reg_lower_gamma(ns, ns * x / (2.0 * sigma2))


def cdf_all_idle(x: float, scn: Scenario) -> float:
    """CDF of the energy statistic when every user is idle (noise only).

    Finite Poisson-weighted series; identical to
    ``cdf_given_sigma(x, noise_var / 2, num_samples)``.
    """
    if x < 0.0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    z = scn.num_samples * x / scn.noise_var
    term = 1.0
    total = 1.0
    for n in range(1, scn.num_samples):
        term *= z / n
        total += term
    return _clamp01(1.0 - total * math.exp(-z))


class _MixtureCdf:
    """Precomputed evaluator of the occupancy-conditioned CDF.

    For the mixture ``offset + sum Gamma(a_i, b_i)`` the CDF is

        F(x) = 1 - sum_{n,i,k,j} C(i,k,j,n) * (ns*x/2)^n
                     * exp(c/b_i) * ext_inc_gamma(j-n+1, c/b_i, ns*x/(2 b_i))

    with j in 0..k-1 and n in 0..ns-1.  Only the order ``alpha = j - n + 1``
    and the scale index enter the tail integral, so the quadruple sum
    collapses to one integral per (component, order) pair; the rational
    coefficients are folded into a per-mixture tensor built once here.
    """

    def __init__(self, mix: GammaMixture, xi: XiTable, ns: int,
                 settings: QuadratureSettings):
        self.ns = int(ns)
        self.settings = settings
        # tightened tolerance learned from earlier evaluations (threshold
        # sweeps hit the same mixture many times); monotone, and every use is
        # re-verified against the realized term mass
        self._rel_hint: float | None = None
        c = mix.offset
        shapes = mix.shapes
        scales = mix.scales

        alphas, x0s, beta_per_x, coef = [], [], [], []
        for i, (a_i, b_i) in enumerate(zip(shapes, scales)):
            a_i = int(a_i)
            for alpha in range(2 - self.ns, a_i + 1):
                row = np.zeros(self.ns)
                for n in range(self.ns):
                    j = alpha + n - 1
                    if j < 0 or j > a_i - 1:
                        continue
                    s = 0.0
                    for k in range(j + 1, a_i + 1):
                        s += (
                            xi.value(i, k)
                            * math.comb(k - 1, j)
                            * (-c) ** (k - 1 - j)
                            / (b_i ** (k + n - j - 1) * math.factorial(k - 1))
                        )
                    row[n] = s / math.factorial(n)
                if not row.any():
                    continue
                alphas.append(float(alpha))
                x0s.append(c / b_i)
                beta_per_x.append(self.ns / (2.0 * b_i))
                coef.append(row)

        self._alphas = np.array(alphas)
        self._x0s = np.array(x0s)
        self._beta_per_x = np.array(beta_per_x)
        self._coef = np.array(coef)  # (terms, ns)

    def cdf(self, x: float) -> float:
        if x < 0.0:
            raise DomainError(f"x must be nonnegative, got {x!r}")
        if x == 0.0:
            return 0.0
        xpow = np.power(0.5 * self.ns * x, np.arange(self.ns))
        survival, rel_used = _survival_sum(
            self._alphas, self._x0s, self._beta_per_x * x,
            self._coef @ xpow, self.settings, rel_hint=self._rel_hint,
        )
        if rel_used < self.settings.rel_tol:
            cur = self._rel_hint
            self._rel_hint = rel_used if cur is None else min(cur, rel_used)
        return _clamp01(1.0 - survival)


@lru_cache(maxsize=512)
def _mixture_evaluator(mix: GammaMixture, xi: XiTable, ns: int,
                       settings: QuadratureSettings) -> _MixtureCdf:
    return _MixtureCdf(mix, xi, ns, settings)


def cdf_given_occupancy(
    x: float,
    mix: GammaMixture,
    xi: XiTable,
    ns: int,
    settings: QuadratureSettings | None = None,
) -> float:
    """Fading-averaged CDF of the energy statistic for a fixed occupancy."""
    if int(ns) != ns or ns < 1:
        raise DomainError(f"ns must be a positive integer, got {ns!r}")
    return _mixture_evaluator(mix, xi, int(ns), settings or DEFAULT_QUADRATURE).cdf(x)


def cdf_rayleigh(
    x: float,
    mix: GammaMixture,
    xi: XiTable,
    ns: int,
    settings: QuadratureSettings | None = None,
) -> float:
    """All-links-Rayleigh specialization (every shape 1).

    With unit shapes the general coefficient tensor degenerates to the
    leaner triple sum (only k = 1, j = 0 contribute), so this validates the
    shapes and shares the precomputed evaluator with
    :func:`cdf_given_occupancy`.
    """
    if np.any(mix.shapes != 1):
        raise DomainError("cdf_rayleigh requires every component shape to be 1")
    return cdf_given_occupancy(x, mix, xi, ns, settings)


def cdf_single_pu(
    x: float,
    profile: PuProfile,
    noise_var: float,
    ns: int,
    settings: QuadratureSettings | None = None,
) -> float:
    """Single-transmitter CDF written directly in link terms (double sum)."""
    if x < 0.0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    s = settings or DEFAULT_QUADRATURE
    ns = int(ns)
    m = profile.nakagami_m
    v = profile.avg_snr * noise_var  # received power d^-xi sigma_h^2 sigma_s^2
    pref = 2.0 * m**m / (v**m * math.factorial(m - 1))
    alphas, x0s, betas, weights = [], [], [], []
    for k in range(m):
        for n in range(ns):
            alphas.append(float(k - n + 1))
            x0s.append(m * noise_var / v)
            betas.append(m * ns * x / v)
            weights.append(
                pref
                * math.comb(m - 1, k)
                * 2.0 ** (k - n)
                / math.factorial(n)
                * (-noise_var) ** (m - 1 - k)
                * (ns * x) ** n
                * (v / (2.0 * m)) ** (k - n + 1)
            )
    survival, _ = _survival_sum(np.array(alphas), np.array(x0s),
                                np.array(betas), weights, s)
    return _clamp01(1.0 - survival)


@lru_cache(maxsize=128)
def _hypothesis_terms(scn: Scenario, hypothesis: str, settings: QuadratureSettings):
    """(prior, evaluator) per occupancy set; evaluator None marks all-idle."""
    terms = []
    for occ, prior in enumerate_occupancies(scn, hypothesis):
        if prior == 0.0:
            continue
        if occ.num_active == 0:
            terms.append((prior, None))
        else:
            mix = active_mixture(scn, occ)
            xi = xi_coefficients(mix)
            terms.append((prior, _mixture_evaluator(mix, xi, scn.num_samples, settings)))
    return tuple(terms)


def detection_probability(
    scn: Scenario, gamma, settings: QuadratureSettings | None = None
) -> float:
    """P(statistic > threshold | in-cell user busy), averaged over interferer
    occupancy and fading."""
    g = _as_gamma(gamma)
    total = 0.0
    for prior, ev in _hypothesis_terms(scn, "pu1_busy", settings or DEFAULT_QUADRATURE):
        total += prior * (1.0 - ev.cdf(g))
    return _clamp01(total)


def false_alarm_probability(
    scn: Scenario, gamma, settings: QuadratureSettings | None = None
) -> float:
    """P(statistic > threshold | in-cell user idle), interference included."""
    g = _as_gamma(gamma)
    total = 0.0
    for prior, ev in _hypothesis_terms(scn, "pu1_idle", settings or DEFAULT_QUADRATURE):
        if ev is None:
            total += prior * (1.0 - cdf_all_idle(g, scn))
        else:
            total += prior * (1.0 - ev.cdf(g))
    return _clamp01(total)


def sensing_probabilities(
    scn: Scenario, gamma, settings: QuadratureSettings | None = None
) -> SensingProbabilities:
    return SensingProbabilities(
        p_fa=false_alarm_probability(scn, gamma, settings),
        p_d=detection_probability(scn, gamma, settings),
    )


def solve_threshold(
    scn: Scenario,
    target_pfa: float,
    settings: QuadratureSettings | None = None,
    tol: float = 1e-9,
    max_bisect: int = 200,
) -> EnergyThreshold:
    """Threshold achieving a target false-alarm probability.

    Brackets by doubling (the false-alarm curve is continuous and strictly
    decreasing from 1 to 0), then bisects until the achieved value is within
    ``tol`` of the target.
    """
    if not 0.0 < target_pfa < 1.0:
        raise DomainError(f"target_pfa must lie in (0, 1), got {target_pfa!r}")
    s = settings or DEFAULT_QUADRATURE

    lo = 0.0
    hi = scn.noise_var
    for _ in range(200):
        if false_alarm_probability(scn, hi, s) < target_pfa:
            break
        lo = hi
        hi *= 2.0
    else:
        raise ConvergenceError("failed to bracket the target false-alarm rate")

    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        val = false_alarm_probability(scn, mid, s)
        if abs(val - target_pfa) <= tol:
            return EnergyThreshold(mid)
        if val > target_pfa:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"threshold search did not reach |pfa - target| <= {tol} "
        f"within {max_bisect} bisection steps"
    )
