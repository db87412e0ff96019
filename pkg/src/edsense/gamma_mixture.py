"""Offset sums of gamma variates and their partial-fraction density.

The conditional per-sample variance of the received signal is
``offset + sum_i Gamma(shape_i, scale_i)`` (one gamma term per active
transmitter, plus the constant noise floor).  With integer shapes and
pairwise-distinct scales the density of that sum expands into a finite
mixture of gamma kernels; :func:`xi_coefficients` computes the expansion
coefficients by a downward recursion from the leading pole residues.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConditioningError, DomainError, ScaleGapWarning

#: scales closer than this (relatively) are treated as the same pole
MERGE_RTOL = 1e-9
#: below this relative gap the expansion is flagged as ill-conditioned
SCALE_GAP_WARN = 1e-3


@dataclass(frozen=True)
class GammaComponent:
    """One gamma term: integer shape, positive scale (units of energy)."""

    shape: int
    scale: float

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise DomainError(f"shape must be a positive integer, got {self.shape!r}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise DomainError(f"scale must be positive and finite, got {self.scale!r}")
        object.__setattr__(self, "shape", int(self.shape))
        object.__setattr__(self, "scale", float(self.scale))


def merge_equal_scales(
    components, rel_tol: float = MERGE_RTOL
) -> list[GammaComponent]:
    """Combine components whose scales agree within ``rel_tol`` (relative).

    Gamma variates with a common scale add their shapes exactly, so merging
    is the correct limit of coinciding poles, not an approximation.  First-seen
    order and scale values are kept.
    """
    merged: list[GammaComponent] = []
    for comp in components:
        comp = comp if isinstance(comp, GammaComponent) else GammaComponent(*comp)
        for idx, seen in enumerate(merged):
            if abs(comp.scale - seen.scale) <= rel_tol * max(comp.scale, seen.scale):
                merged[idx] = GammaComponent(seen.shape + comp.shape, seen.scale)
                break
        else:
            merged.append(comp)
    return merged


@dataclass(frozen=True)
class GammaMixture:
    """Offset sum of gamma variates with pairwise-distinct scales."""

    components: tuple[GammaComponent, ...]
    offset: float = 0.0

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, GammaComponent) else GammaComponent(*c)
            for c in self.components
        )
        if not comps:
            raise DomainError("mixture needs at least one component")
        if not (self.offset >= 0.0 and math.isfinite(self.offset)):
            raise DomainError(f"offset must be nonnegative, got {self.offset!r}")
        for i, a in enumerate(comps):
            for b in comps[i + 1 :]:
                if abs(a.scale - b.scale) <= MERGE_RTOL * max(a.scale, b.scale):
                    raise DomainError(
                        f"scales {a.scale!r} and {b.scale!r} coincide; "
                        "merge_equal_scales before constructing"
                    )
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_components(cls, components, offset: float = 0.0) -> "GammaMixture":
        """Build a mixture, merging equal-scale components first."""
        return cls(tuple(merge_equal_scales(components)), offset)

    @property
    def shapes(self) -> np.ndarray:
        return np.array([c.shape for c in self.components], dtype=np.int64)

    @property
    def scales(self) -> np.ndarray:
        return np.array([c.scale for c in self.components], dtype=float)

    @property
    def mean(self) -> float:
        return self.offset + float(sum(c.shape * c.scale for c in self.components))


@dataclass(frozen=True)
class XiTable:
    """Partial-fraction coefficients, one row per component.

    ``coeffs[i][k-1]`` weights the gamma kernel of order k at the i-th
    component's scale; the grand total over all entries is 1 (the density
    integrates to one).
    """

    coeffs: tuple[tuple[float, ...], ...]

    def value(self, i: int, k: int) -> float:
        return self.coeffs[i][k - 1]

    def entries(self) -> dict[tuple[int, int], float]:
        return {
            (i, k + 1): v
            for i, row in enumerate(self.coeffs)
            for k, v in enumerate(row)
        }

    def as_matrix(self) -> np.ndarray:
        """Rows padded with zeros to the largest shape."""
        width = max(len(row) for row in self.coeffs)
        out = np.zeros((len(self.coeffs), width))
        for i, row in enumerate(self.coeffs):
            out[i, : len(row)] = row
        return out


def _kahan_add(total: float, comp: float, term: float) -> tuple[float, float]:
    y = term - comp
    t = total + y
    comp = (t - total) - y
    return t, comp


def min_relative_scale_gap(scales) -> float:
    scales = np.sort(np.asarray(scales, dtype=float))
    if scales.size < 2:
        return math.inf
    gaps = (scales[1:] - scales[:-1]) / scales[1:]
    return float(gaps.min())


def xi_coefficients(mix: GammaMixture) -> XiTable:
    """Expansion coefficients of the mixture density.

    The leading coefficient at each pole is the residue
    ``prod_{q != i} (1 - b_q/b_i)^(-a_q)``; lower orders follow from the
    downward recursion

        xi(i, a_i - k) = (1/k) * sum_{j=1..k} S_i(j) * xi(i, a_i - k + j),
        S_i(j) = sum_{q != i} a_q * (b_q / (b_q - b_i))^j,

    where ``b_q/(b_q - b_i)`` is the stable rewrite of
    ``(1/b_i - 1/b_q)^(-1) / b_i``.  Sums are compensated: coefficients can
    be large with alternating signs when scales are close.
    """
    shapes = mix.shapes
    scales = mix.scales
    L = len(shapes)

    gap = min_relative_scale_gap(scales)
    if gap < SCALE_GAP_WARN:
        warnings.warn(ScaleGapWarning(gap, SCALE_GAP_WARN), stacklevel=2)

    rows: list[tuple[float, ...]] = []
    # overflow surfaces as a ConditioningError below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(L):
            a_i = int(shapes[i])
            b_i = scales[i]
            lead = 1.0
            for q in range(L):
                if q != i:
                    lead *= (1.0 - scales[q] / b_i) ** (-float(shapes[q]))
            row = np.zeros(a_i)
            row[a_i - 1] = lead
            if a_i > 1:
                # S_i(j) for j = 1 .. a_i - 1
                pow_sums = np.zeros(a_i)
                for j in range(1, a_i):
                    s, c = 0.0, 0.0
                    for q in range(L):
                        if q != i:
                            rho = scales[q] / (scales[q] - b_i)
                            s, c = _kahan_add(s, c, shapes[q] * rho**j)
                    pow_sums[j] = s
                for k in range(1, a_i):
                    s, c = 0.0, 0.0
                    for j in range(1, k + 1):
                        s, c = _kahan_add(s, c, pow_sums[j] * row[a_i - k + j - 1])
                    row[a_i - k - 1] = s / k
            if not np.all(np.isfinite(row)):
                raise ConditioningError(
                    f"non-finite expansion coefficients for component {i} "
                    f"(min relative scale gap {gap:.3e})"
                )
            rows.append(tuple(row))
    return XiTable(tuple(rows))


def mixture_pdf(mix: GammaMixture, xi: XiTable, y):
    """Density of the offset gamma sum; zero below the offset.

    Accepts scalars or arrays.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("y must be finite")
    u = y - mix.offset
    out = np.zeros_like(u)
    pos = u >= 0.0
    up = u[pos]
    acc = np.zeros_like(up)
    for i, comp in enumerate(mix.components):
        b = comp.scale
        for k in range(1, comp.shape + 1):
            acc += (
                xi.value(i, k)
                * up ** (k - 1)
                * np.exp(-up / b)
                / (b**k * math.factorial(k - 1))
            )
    out[pos] = acc
    return float(out) if out.ndim == 0 else out


def mixture_cdf(mix: GammaMixture, xi: XiTable, y):
    """Distribution function matching :func:`mixture_pdf` term by term."""
    y = np.asarray(y, dtype=float)
    u = np.maximum(y - mix.offset, 0.0)
    acc = np.zeros_like(u)
    for i, comp in enumerate(mix.components):
        for k in range(1, comp.shape + 1):
            acc += xi.value(i, k) * special.gammainc(k, u / comp.scale)
    return float(acc) if acc.ndim == 0 else acc


def mixture_mgf(mix: GammaMixture, s: float) -> float:
    """E[exp(s * X)] = exp(s*offset) * prod_i (1 - scale_i * s)^(-shape_i).

    Defined for s below the smallest pole 1/max(scale_i); used as an
    independent check on the expansion coefficients.
    """
    if not math.isfinite(s):
        raise DomainError("s must be finite")
    pole = 1.0 / max(c.scale for c in mix.components)
    if s >= pole:
        raise DomainError(f"s={s!r} is at or beyond the smallest pole {pole!r}")
    val = math.exp(s * mix.offset)
    for c in mix.components:
        val *= (1.0 - c.scale * s) ** (-float(c.shape))
    return val
