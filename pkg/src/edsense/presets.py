"""Named benchmark scenarios for the bundled study presets.

All presets use 5 sensing samples and unit noise/channel variances; links are
specified by received SNR (in-cell user) and INR (interferers).
"""

from .scenario import PuProfile, Scenario

NUM_SAMPLES = 5
NOISE_VAR = 1.0

#: interferer INR ladder for the multi-user presets, in dB
INTERFERER_INR_DB = (0.0, -1.0, -2.0, -3.0, -5.0)

FIGURE_NAMES = ("fig1", "fig2", "fig3")


def _single_pu(snr_db: float, m: int) -> Scenario:
    return Scenario(
        noise_var=NOISE_VAR,
        num_samples=NUM_SAMPLES,
        pus=(PuProfile.from_snr_db(snr_db, m=m, activity_prior=0.5),),
    )


def _multi_pu(num_interferers: int, p: float) -> Scenario:
    pus = [PuProfile.from_snr_db(0.0, m=1, activity_prior=0.5)]
    pus += [
        PuProfile.from_snr_db(inr, m=1, activity_prior=p)
        for inr in INTERFERER_INR_DB[:num_interferers]
    ]
    return Scenario(noise_var=NOISE_VAR, num_samples=NUM_SAMPLES, pus=tuple(pus))


def fig1_presets() -> list[tuple[str, Scenario]]:
    """Single user, fading severity and SNR sweep."""
    return [
        (f"m{m}_snr{int(snr)}dB", _single_pu(snr, m))
        for snr in (0.0, 5.0)
        for m in (1, 2, 3)
    ]


def fig2_presets(p_values=(0.0, 0.2, 0.5, 0.8, 1.0)) -> list[tuple[str, Scenario]]:
    """Six users, Rayleigh links, sweep of the interferer activity prior."""
    return [(f"p{p:g}", _multi_pu(5, p)) for p in p_values]


def fig3_presets() -> list[tuple[str, Scenario]]:
    """User-count sweep at activity prior 0.5, Rayleigh links."""
    return [(f"M{m}", _multi_pu(m - 1, 0.5)) for m in range(1, 7)]


def figure_presets(name: str) -> list[tuple[str, Scenario]]:
    if name == "fig1":
        return fig1_presets()
    if name == "fig2":
        return fig2_presets()
    if name == "fig3":
        return fig3_presets()
    raise ValueError(f"unknown figure name {name!r}; expected one of {FIGURE_NAMES}")


def all_presets() -> list[tuple[str, Scenario]]:
    out = []
    for fig in FIGURE_NAMES:
        out += [(f"{fig}_{label}", scn) for label, scn in figure_presets(fig)]
    return out
