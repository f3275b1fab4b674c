"""Intensity-difference readout of the plasmonic sensor.

Mode a probes the gold film (amplitude reflection ``|r_sp|``), mode b is an
unperturbed reference; photodetectors with amplitude efficiencies
``eta_a, eta_b`` record the difference ``M = n_b - n_a``.  Its first two
moments depend on the input light only through the per-mode mean ``N``, the
Mandel Q of one mode and the normalised difference-noise ``sigma``, which is
what makes a closed-form comparison across beam families possible.  The
estimation precision is the measured noise divided by the slope of the mean
signal with respect to the analyte index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .fresnel import (
    IncidenceGeometry,
    KretschmannStack,
    NoInteriorExtremumError,
    _rsp,
    _stack_constants,
    inflection_index,
    tangential_wavevector,
)
from .quantum_states import PhotonStatistics

__all__ = [
    "MetrologyDomainError",
    "DivergenceError",
    "DegenerateOperatingPointError",
    "ChannelEfficiencies",
    "MeasurementStats",
    "PrecisionResult",
    "STATE_FAMILIES",
    "family_statistics",
    "signal_mean",
    "signal_std",
    "ratio",
    "ratio_twin_fock",
    "ratio_tmsv",
    "precision",
    "sweep_ratio",
    "sweep_precision_vs_angle",
]


class MetrologyDomainError(ValueError):
    """Moment formula evaluated outside its physical domain."""


class DivergenceError(ArithmeticError):
    """Requested quantity diverges at this operating point."""


class DegenerateOperatingPointError(ZeroDivisionError):
    """The mean signal has zero slope here, so no index information."""


@dataclass(frozen=True)
class ChannelEfficiencies:
    """Amplitude transmissions of the two detection channels."""

    eta_a: float
    eta_b: float

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class MeasurementStats:
    """Mean and standard deviation of the photon-number difference."""

    mean: float
    std: float

    def __post_init__(self):
        if self.std < 0.0:
            raise ValueError(f"std must be non-negative, got {self.std}")


@dataclass(frozen=True)
class PrecisionResult:
    """Index precision together with the ingredients it was built from."""

    delta_n: float
    signal_slope: float
    noise: float


def signal_mean(r_abs: float, eff: ChannelEfficiencies, n_photons: float) -> float:
    """Mean photon-number difference, ``(eta_b^2 - |r|^2 eta_a^2) N``."""
    return (eff.eta_b**2 - r_abs**2 * eff.eta_a**2) * n_photons


def signal_std(
    r_abs: float,
    eff: ChannelEfficiencies,
    n_photons: float,
    q_mandel: float,
    sigma: float,
) -> float:
    """Standard deviation of the photon-number difference.

    Closed form in the input statistics,

    ``sqrt(N) * [(eta_b^2 - |r|^2 eta_a^2)^2 Q + 2 |r|^2 eta_a^2 eta_b^2 sigma
    + eta_b^2 + |r|^2 eta_a^2 (1 - 2 eta_b^2)]^(1/2)``;

    it agrees exactly with pushing the state through two binomial loss
    channels (see :mod:`plasmonq.fock_oracle`).  Rounding-level negative
    radicands are clamped to zero; genuinely negative ones (unphysical
    Q/sigma combinations) raise.
    """
    ta = r_abs**2 * eff.eta_a**2
    tb = eff.eta_b**2
    radicand = (tb - ta) ** 2 * q_mandel + 2.0 * ta * tb * sigma + tb + ta * (1.0 - 2.0 * tb)
    if radicand < 0.0:
        if radicand < -1e-12:
            raise MetrologyDomainError(
                f"variance came out negative ({radicand}) for Q={q_mandel}, sigma={sigma}"
            )
        radicand = 0.0
    return math.sqrt(n_photons) * math.sqrt(radicand)


def ratio(r_abs: float, eta: float, q_mandel: float, sigma: float) -> float:
    """Precision enhancement over an equally bright ideal coherent probe.

    ``R = [(1 + |r|^2) / ((1-|r|^2)^2 eta^2 Q + 2 |r|^2 eta^2 sigma
    + 1 + |r|^2 (1 - 2 eta^2))]^(1/2)``

    for balanced detection ``eta_a = eta_b = eta``; R > 1 means the probe
    beats the coherent state.  R is independent of the brightness N.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    r2 = r_abs**2
    e2 = eta * eta
    den = (1.0 - r2) ** 2 * e2 * q_mandel + 2.0 * r2 * e2 * sigma + 1.0 + r2 * (1.0 - 2.0 * e2)
    if den <= 0.0:
        raise MetrologyDomainError(
            f"enhancement denominator {den} is not positive at |r|={r_abs}, eta={eta}"
        )
    return math.sqrt((1.0 + r2) / den)


def ratio_twin_fock(r_abs: float) -> float:
    """Lossless-detection enhancement of the twin Fock beam, any brightness.

    ``R_NN = [(1+|r|^2)/(|r|^2 - |r|^4)]^(1/2)``, diverging as |r| -> 0 or 1.
    """
    if not 0.0 < r_abs < 1.0:
        raise DivergenceError(
            f"twin-Fock enhancement diverges as |r|^2 -> 0 or 1 (got |r|={r_abs})"
        )
    r2 = r_abs**2
    return math.sqrt((1.0 + r2) / (r2 - r2 * r2))


def ratio_tmsv(r_abs: float, n_photons: float) -> float:
    """Lossless-detection enhancement of two-mode squeezed vacuum.

    ``R_TMSV = [(1+|r|^2)/(1 - |r|^2 + N (1-|r|^2)^2)]^(1/2)``; approaches
    ``(1+N)^(-1/2)`` as |r| -> 0.
    """
    r2 = r_abs**2
    den = 1.0 - r2 + n_photons * (1.0 - r2) ** 2
    if den <= 0.0:
        raise MetrologyDomainError(
            f"enhancement denominator {den} is not positive at |r|={r_abs}, N={n_photons}"
        )
    return math.sqrt((1.0 + r2) / den)


# Per-mode mean, Mandel Q, difference noise and mode correlation for the
# five beam families, as functions of the per-mode mean photon number N.
# These are the exact statistics of the untruncated states; agreement with
# quantum_states.statistics() on truncated expansions is covered by tests.
STATE_FAMILIES = ("coherent", "twin-fock", "tmsv", "noon", "squeezed")


def family_statistics(family: str, n_photons: float) -> PhotonStatistics:
    """Closed-form :class:`PhotonStatistics` for a named beam family."""
    key = family.strip().lower().replace("_", "-")
    if key == "squeezed-product":
        key = "squeezed"
    if n_photons <= 0.0:
        raise ValueError(f"n_photons must be positive, got {n_photons}")
    integer_needed = key in ("twin-fock", "noon")
    if integer_needed and n_photons != int(n_photons):
        raise ValueError(f"{key} needs an integer photon number, got {n_photons}")
    n = float(n_photons)
    if key == "coherent":
        q, s, j = 0.0, 1.0, 0.0
    elif key == "twin-fock":
        q, s, j = -1.0, 0.0, 1.0
    elif key == "tmsv":
        q, s, j = n, 0.0, 1.0
    elif key == "noon":
        q, s, j = n - 1.0, 2.0 * n, -1.0
    elif key == "squeezed":
        q, s, j = 2.0 * n + 1.0, 2.0 * n + 2.0, 0.0
    else:
        raise ValueError(f"unknown state family {family!r}; known: {', '.join(STATE_FAMILIES)}")
    return PhotonStatistics(mean_a=n, mean_b=n, q_mandel=q, sigma=s, j_corr=j)


def _reflection_magnitude(stack: KretschmannStack, k_x: float, n_analyte: float) -> float:
    eps1, eps2, _, k0 = _stack_constants(stack)
    return abs(_rsp(eps1, eps2, complex(n_analyte * n_analyte), stack.thickness_nm, k0, k_x))


def precision(
    stack: KretschmannStack,
    geom: IncidenceGeometry,
    n_analyte: float,
    state_stats: PhotonStatistics,
    eff: ChannelEfficiencies,
    h: float = 1e-6,
) -> PrecisionResult:
    """Index precision ``delta_n = noise / |d<M>/dn|`` at ``n_analyte``.

    The slope is a central finite difference of the mean signal through the
    stack's reflection coefficient; for balanced efficiencies it equals
    ``eta^2 N |d|r_sp|^2/dn|``.
    """
    if h <= 0.0:
        raise ValueError("finite-difference step h must be positive")
    if not (0.0 < n_analyte - h and n_analyte + h < stack.n_prism):
        raise ValueError(
            f"n_analyte={n_analyte} with step h={h} leaves (0, n_prism) during differencing"
        )
    n_photons = state_stats.mean_a
    k_x = tangential_wavevector(stack, geom)
    mean_hi = signal_mean(_reflection_magnitude(stack, k_x, n_analyte + h), eff, n_photons)
    mean_lo = signal_mean(_reflection_magnitude(stack, k_x, n_analyte - h), eff, n_photons)
    slope = (mean_hi - mean_lo) / (2.0 * h)
    if slope == 0.0:
        raise DegenerateOperatingPointError(
            f"mean signal is stationary at n_analyte={n_analyte}; no index information"
        )
    noise = signal_std(
        _reflection_magnitude(stack, k_x, n_analyte),
        eff,
        n_photons,
        state_stats.q_mandel,
        state_stats.sigma,
    )
    return PrecisionResult(delta_n=noise / abs(slope), signal_slope=slope, noise=noise)


def sweep_ratio(
    stack: KretschmannStack,
    geom: IncidenceGeometry,
    n_grid,
    state_stats: PhotonStatistics,
    eta: float = 1.0,
) -> list[tuple[float, float]]:
    """Enhancement ratio across an analyte-index grid.

    Points where the ratio is undefined are reported as warnings and carry
    NaN; the sweep always returns one pair per grid point.
    """
    k_x = tangential_wavevector(stack, geom)
    out: list[tuple[float, float]] = []
    for n in n_grid:
        n = float(n)
        if not 0.0 < n < stack.n_prism:
            raise ValueError(f"grid point n={n} outside the physical range (0, n_prism)")
        try:
            value = ratio(
                _reflection_magnitude(stack, k_x, n),
                eta,
                state_stats.q_mandel,
                state_stats.sigma,
            )
        except (MetrologyDomainError, DivergenceError) as exc:
            warnings.warn(f"n_analyte={n}: {exc}", stacklevel=2)
            value = math.nan
        out.append((n, value))
    return out


def sweep_precision_vs_angle(
    stack: KretschmannStack,
    theta_grid,
    states,
    n_photons: float = 1.0,
    eta: float = 1.0,
    n_range: tuple[float, float] = (1.30, 1.4422),
    h: float = 1e-6,
    tol: float = 1e-9,
    grid_points: int = 2001,
) -> list[dict]:
    """Precision at the steepest-flank operating point, per angle and state.

    For each incidence angle the analyte index of maximum slope magnitude is
    located within ``n_range`` (restricted to total internal reflection) and
    every requested state is evaluated there.  ``states`` holds family names
    (statistics built at ``n_photons``) or ``(label, PhotonStatistics)``
    pairs.  Angles without an interior steepest point are skipped with a
    warning; each surviving angle contributes one row per state with keys
    ``theta_deg, n_inf, state, N, eta, delta_n, slope, noise``.
    """
    resolved: list[tuple[str, PhotonStatistics]] = []
    for item in states:
        if isinstance(item, str):
            resolved.append((item, family_statistics(item, n_photons)))
        else:
            label, stats = item
            resolved.append((str(label), stats))
    eff = ChannelEfficiencies(eta, eta)
    rows: list[dict] = []
    for theta in theta_grid:
        geom = IncidenceGeometry(float(theta))
        try:
            n_inf = inflection_index(stack, geom, n_range=n_range, tol=tol, h=h,
                                     grid_points=grid_points)
        except NoInteriorExtremumError as exc:
            warnings.warn(f"theta={theta} deg skipped: {exc}", stacklevel=2)
            continue
        for label, stats in resolved:
            result = precision(stack, geom, n_inf, stats, eff, h=h)
            rows.append(
                {
                    "theta_deg": float(theta),
                    "n_inf": n_inf,
                    "state": label,
                    "N": stats.mean_a,
                    "eta": eta,
                    "delta_n": result.delta_n,
                    "slope": result.signal_slope,
                    "noise": result.noise,
                }
            )
    return rows
