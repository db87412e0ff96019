"""Data model for the sensed multi-transmitter environment.

A :class:`Scenario` is the detector's view of the world: noise variance, the
number of sensing samples, and an ordered list of primary users (index 0 is
the in-cell transmitter the detector is responsible for; the rest are
interferers from neighboring cells).  Occupancy enumeration produces every
busy/idle combination consistent with a hypothesis on the in-cell user,
weighted by the interferers' activity priors.
"""

import itertools
import json
import math
from dataclasses import dataclass

from .errors import DomainError, EnumerationSizeError, ScenarioFormatError
from .gamma_mixture import GammaComponent, GammaMixture

#: exact enumeration is 2^(M-1); refuse beyond this many users
MAX_ENUM_PUS = 20

HYPOTHESES = ("pu1_busy", "pu1_idle")


@dataclass(frozen=True)
class RawLink:
    """Propagation quadruple from which the average SNR is derived."""

    distance: float
    path_loss_exp: float
    signal_var: float
    channel_var: float

    def __post_init__(self):
        if not self.distance > 0.0:
            raise DomainError("distance must be positive")
        if self.path_loss_exp < 0.0:
            raise DomainError("path_loss_exp must be nonnegative")
        if not self.signal_var > 0.0:
            raise DomainError("signal_var must be positive")
        if not self.channel_var > 0.0:
            raise DomainError("channel_var must be positive")


@dataclass(frozen=True)
class PuProfile:
    """One primary user: fading shape, average received SNR, activity prior."""

    nakagami_m: int
    avg_snr: float
    activity_prior: float
    raw: RawLink | None = None

    def __post_init__(self):
        if int(self.nakagami_m) != self.nakagami_m or self.nakagami_m < 1:
            raise DomainError("nakagami_m must be a positive integer")
        object.__setattr__(self, "nakagami_m", int(self.nakagami_m))
        if not (self.avg_snr > 0.0 and math.isfinite(self.avg_snr)):
            raise DomainError("avg_snr must be positive and finite")
        if not 0.0 <= self.activity_prior <= 1.0:
            raise DomainError("activity_prior must lie in [0, 1]")

    @classmethod
    def from_snr_db(cls, snr_db: float, m: int = 1, activity_prior: float = 0.5):
        return cls(nakagami_m=m, avg_snr=10.0 ** (snr_db / 10.0),
                   activity_prior=activity_prior)

    @classmethod
    def from_raw(cls, m: int, activity_prior: float, raw: RawLink, noise_var: float):
        snr = (
            raw.distance ** (-raw.path_loss_exp)
            * raw.channel_var
            * raw.signal_var
            / noise_var
        )
        return cls(nakagami_m=m, avg_snr=snr, activity_prior=activity_prior, raw=raw)

    @property
    def channel_var(self) -> float:
        """Fading power E|h|^2 (unity unless a raw link was given)."""
        return self.raw.channel_var if self.raw is not None else 1.0


@dataclass(frozen=True)
class Scenario:
    noise_var: float
    num_samples: int
    pus: tuple[PuProfile, ...]

    def __post_init__(self):
        if not (self.noise_var > 0.0 and math.isfinite(self.noise_var)):
            raise DomainError("noise_var must be positive and finite")
        if int(self.num_samples) != self.num_samples or self.num_samples < 1:
            raise DomainError("num_samples must be a positive integer")
        object.__setattr__(self, "num_samples", int(self.num_samples))
        object.__setattr__(self, "pus", tuple(self.pus))
        if not self.pus:
            raise DomainError("scenario needs at least one primary user")

    @property
    def num_pus(self) -> int:
        return len(self.pus)


@dataclass(frozen=True)
class OccupancySet:
    """Busy/idle flag per primary user."""

    flags: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "flags", tuple(bool(f) for f in self.flags))

    @property
    def active_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.flags) if f)

    @property
    def num_active(self) -> int:
        return sum(self.flags)


def enumerate_occupancies(
    scn: Scenario, hypothesis: str
) -> list[tuple[OccupancySet, float]]:
    """All occupancy sets consistent with a hypothesis on the in-cell user.

    The in-cell flag is pinned by the hypothesis; the interferer flags range
    over all combinations with prior ``prod p_j^f (1-p_j)^(1-f)``.  Priors sum
    to one for each hypothesis.
    """
    if hypothesis not in HYPOTHESES:
        raise DomainError(f"hypothesis must be one of {HYPOTHESES}, got {hypothesis!r}")
    m = scn.num_pus
    if m > MAX_ENUM_PUS:
        raise EnumerationSizeError(
            f"exact enumeration over {m} users needs 2^{m - 1} sets; "
            f"limit is {MAX_ENUM_PUS} users"
        )
    first = hypothesis == "pu1_busy"
    priors = [p.activity_prior for p in scn.pus[1:]]
    out = []
    for rest in itertools.product((False, True), repeat=m - 1):
        w = 1.0
        for f, p in zip(rest, priors):
            w *= p if f else (1.0 - p)
        out.append((OccupancySet((first,) + rest), w))
    return out


def active_mixture(scn: Scenario, occ: OccupancySet) -> GammaMixture:
    """Distribution of the conditional per-sample variance for one occupancy.

    Each active user contributes a gamma term with shape equal to its fading
    parameter and scale ``avg_snr * noise_var / (2 m)``; the offset is the
    noise floor ``noise_var / 2``.  Equal scales are merged.
    """
    if len(occ.flags) != scn.num_pus:
        raise DomainError("occupancy length does not match scenario")
    active = occ.active_indices
    if not active:
        raise DomainError("no active user: the all-idle law is a separate path")
    comps = [
        GammaComponent(
            scn.pus[i].nakagami_m,
            scn.pus[i].avg_snr * scn.noise_var / (2.0 * scn.pus[i].nakagami_m),
        )
        for i in active
    ]
    return GammaMixture.from_components(comps, offset=scn.noise_var / 2.0)


# --- JSON schema ---------------------------------------------------------
#
# {"noise_var": <number>, "num_samples": <int>, "pus": [<pu>, ...]}
# <pu> is {"m": <int>, "activity_prior": <number>} plus either
#   {"snr_db": <number>}  or
#   {"distance": ..., "path_loss_exp": ..., "signal_var": ..., "channel_var": ...}
# Unknown keys are rejected.

_TOP_KEYS = {"noise_var", "num_samples", "pus"}
_PU_COMMON = {"m", "activity_prior"}
_PU_RAW = {"distance", "path_loss_exp", "signal_var", "channel_var"}


def _require_number(obj, key, where):
    if key not in obj:
        raise ScenarioFormatError(f"{where}: missing key {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(f"{where}: key {key!r} must be a number")
    return v


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ScenarioFormatError(f"unknown top-level keys: {sorted(unknown)}")
    noise_var = _require_number(doc, "noise_var", "scenario")
    num_samples = _require_number(doc, "num_samples", "scenario")
    if int(num_samples) != num_samples:
        raise ScenarioFormatError("num_samples must be an integer")
    pus_doc = doc.get("pus")
    if not isinstance(pus_doc, list) or not pus_doc:
        raise ScenarioFormatError("pus must be a non-empty array")
    pus = []
    for idx, pu in enumerate(pus_doc):
        where = f"pus[{idx}]"
        if not isinstance(pu, dict):
            raise ScenarioFormatError(f"{where}: must be an object")
        keys = set(pu)
        unknown = keys - _PU_COMMON - _PU_RAW - {"snr_db"}
        if unknown:
            raise ScenarioFormatError(f"{where}: unknown keys {sorted(unknown)}")
        m = _require_number(pu, "m", where)
        if int(m) != m:
            raise ScenarioFormatError(f"{where}: m must be an integer")
        prior = _require_number(pu, "activity_prior", where)
        has_snr = "snr_db" in keys
        has_raw = bool(keys & _PU_RAW)
        if has_snr and has_raw:
            raise ScenarioFormatError(
                f"{where}: give either snr_db or the raw link quadruple, not both"
            )
        try:
            if has_snr:
                profile = PuProfile.from_snr_db(
                    _require_number(pu, "snr_db", where), m=int(m), activity_prior=prior
                )
            elif has_raw:
                if keys & _PU_RAW != _PU_RAW:
                    raise ScenarioFormatError(
                        f"{where}: raw link needs all of {sorted(_PU_RAW)}"
                    )
                raw = RawLink(
                    distance=_require_number(pu, "distance", where),
                    path_loss_exp=_require_number(pu, "path_loss_exp", where),
                    signal_var=_require_number(pu, "signal_var", where),
                    channel_var=_require_number(pu, "channel_var", where),
                )
                profile = PuProfile.from_raw(int(m), prior, raw, noise_var)
            else:
                raise ScenarioFormatError(
                    f"{where}: needs snr_db or the raw link quadruple"
                )
        except DomainError as exc:
            raise ScenarioFormatError(f"{where}: {exc}") from exc
        pus.append(profile)
    try:
        return Scenario(noise_var=noise_var, num_samples=int(num_samples),
                        pus=tuple(pus))
    except DomainError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def scenario_to_dict(scn: Scenario) -> dict:
    pus = []
    for p in scn.pus:
        if p.raw is not None:
            pus.append(
                {
                    "m": p.nakagami_m,
                    "activity_prior": p.activity_prior,
                    "distance": p.raw.distance,
                    "path_loss_exp": p.raw.path_loss_exp,
                    "signal_var": p.raw.signal_var,
                    "channel_var": p.raw.channel_var,
                }
            )
        else:
            pus.append(
                {
                    "m": p.nakagami_m,
                    "activity_prior": p.activity_prior,
                    "snr_db": 10.0 * math.log10(p.avg_snr),
                }
            )
    return {"noise_var": scn.noise_var, "num_samples": scn.num_samples, "pus": pus}


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)
