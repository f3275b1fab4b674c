"""Twin-mode photon-number states and their counting statistics.

A two-mode pure state is stored as its Fock coefficient matrix ``C[n, m]``
on a finite cutoff.  "Twin-mode" means ``|C[n, m]| == |C[m, n]|``, which
makes the per-mode means and variances equal.  Constructors are provided
for the five beam families compared in the sensing analysis; statistics
are obtained by direct summation over ``|C|**2``, so phases never enter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_TRUNCATION_TOL",
    "TruncationError",
    "CapacityError",
    "UndefinedStatisticsError",
    "FockCoefficients",
    "PhotonStatistics",
    "coherent_product",
    "twin_fock",
    "tmsv",
    "noon",
    "squeezed_product",
    "statistics",
    "is_twin_mode",
    "is_path_symmetric",
    "save_coefficients",
    "load_coefficients",
]

DEFAULT_TRUNCATION_TOL = 1e-10

_MAX_AUTO_CUTOFF = 4096


class TruncationError(ValueError):
    """Cutoff too small for the requested truncation tolerance."""


class CapacityError(ValueError):
    """Cutoff cannot hold the requested Fock components at all."""


class UndefinedStatisticsError(ValueError):
    """Counting statistics are undefined (vacuum mode: zero mean photon number)."""


@dataclass(frozen=True)
class FockCoefficients:
    """Immutable two-mode Fock expansion on ``n, m in 0..cutoff``.

    ``sum |C|**2`` may fall short of 1 for truncated continuous-spectrum
    states; the deficit is exposed as :attr:`truncation_weight`.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError(f"coefficient matrix must be square, got shape {arr.shape}")
        total = float(np.sum(np.abs(arr) ** 2))
        if total > 1.0 + 1e-9:
            raise ValueError(f"coefficients are over-normalised: sum |C|^2 = {total}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def cutoff(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def truncation_weight(self) -> float:
        return max(0.0, 1.0 - float(np.sum(np.abs(self.coeffs) ** 2)))


@dataclass(frozen=True)
class PhotonStatistics:
    """Input-side counting numbers entering the measurement moments."""

    mean_a: float
    mean_b: float
    q_mandel: float
    sigma: float
    j_corr: float


def _check_truncation(weight: float, cutoff: int, tol: float, family: str):
    if not weight < tol:
        raise TruncationError(
            f"{family}: truncation weight {weight:.3e} at cutoff {cutoff} "
            f"exceeds tolerance {tol:.1e}; increase the cutoff"
        )


def coherent_product(
    alpha: complex,
    cutoff: int | None = None,
    truncation_tol: float = DEFAULT_TRUNCATION_TOL,
) -> FockCoefficients:
    """Product of identical coherent states, ``C[n, m] ~ alpha**(n+m)/sqrt(n! m!)``.

    With ``cutoff=None`` the cutoff grows until the truncation weight drops
    below ``truncation_tol``.
    """
    alpha = complex(alpha)

    def amplitudes(c: int) -> np.ndarray:
        s = np.empty(c + 1, dtype=complex)
        s[0] = math.exp(-0.5 * abs(alpha) ** 2)
        for n in range(c):
            s[n + 1] = s[n] * alpha / math.sqrt(n + 1)
        return s

    if cutoff is None:
        cutoff = max(8, int(abs(alpha) ** 2 + 10.0 * math.sqrt(abs(alpha) ** 2 + 1.0)))
        while True:
            s = amplitudes(cutoff)
            mode_mass = float(np.sum(np.abs(s) ** 2))
            if 1.0 - mode_mass * mode_mass < truncation_tol:
                break
            if cutoff >= _MAX_AUTO_CUTOFF:
                raise TruncationError(
                    f"coherent_product: cannot reach tolerance {truncation_tol:.1e} "
                    f"below cutoff {_MAX_AUTO_CUTOFF}"
                )
            cutoff *= 2
    else:
        s = amplitudes(cutoff)
        mode_mass = float(np.sum(np.abs(s) ** 2))
        _check_truncation(1.0 - mode_mass * mode_mass, cutoff, truncation_tol,
                          "coherent_product")
    return FockCoefficients(np.outer(s, s))


def twin_fock(n_photons: int, cutoff: int | None = None) -> FockCoefficients:
    """The state with exactly ``n_photons`` in each mode (finite support)."""
    if n_photons < 0 or n_photons != int(n_photons):
        raise ValueError(f"n_photons must be a non-negative integer, got {n_photons}")
    n_photons = int(n_photons)
    if cutoff is None:
        cutoff = n_photons
    if cutoff < n_photons:
        raise CapacityError(f"cutoff {cutoff} cannot hold |{n_photons},{n_photons}>")
    c = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    c[n_photons, n_photons] = 1.0
    return FockCoefficients(c)


def tmsv(
    mean_photons: float,
    cutoff: int | None = None,
    truncation_tol: float = DEFAULT_TRUNCATION_TOL,
) -> FockCoefficients:
    """Two-mode squeezed vacuum with per-mode mean ``mean_photons``.

    Diagonal expansion ``C[n, n] = sqrt(1 - lam**2) * lam**n`` with
    ``lam = tanh(r)`` and ``sinh(r)**2 = mean_photons``.
    """
    if mean_photons < 0.0:
        raise ValueError("mean_photons must be non-negative")
    lam2 = mean_photons / (1.0 + mean_photons)  # tanh(r)^2
    # truncation weight at cutoff c is lam2**(c+1)
    if cutoff is None:
        if lam2 == 0.0:
            cutoff = 0
        else:
            cutoff = max(0, math.ceil(math.log(truncation_tol) / math.log(lam2)) - 1)
            while lam2 ** (cutoff + 1) >= truncation_tol:
                cutoff += 1
            if cutoff > _MAX_AUTO_CUTOFF:
                raise TruncationError(
                    f"tmsv: tolerance {truncation_tol:.1e} needs cutoff {cutoff} "
                    f"> {_MAX_AUTO_CUTOFF}"
                )
    else:
        _check_truncation(lam2 ** (cutoff + 1), cutoff, truncation_tol, "tmsv")
    lam = math.sqrt(lam2)
    c = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    c[np.diag_indices(cutoff + 1)] = math.sqrt(1.0 - lam2) * lam ** np.arange(cutoff + 1)
    return FockCoefficients(c)


def noon(n_photons: int, cutoff: int | None = None) -> FockCoefficients:
    """``(|2N, 0> + |0, 2N>)/sqrt(2)`` with per-mode mean ``N = n_photons``."""
    if n_photons < 1 or n_photons != int(n_photons):
        raise ValueError(f"n_photons must be a positive integer, got {n_photons}")
    n_photons = int(n_photons)
    if cutoff is None:
        cutoff = 2 * n_photons
    if cutoff < 2 * n_photons:
        raise CapacityError(f"cutoff {cutoff} cannot hold |{2 * n_photons},0>")
    c = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    c[2 * n_photons, 0] = c[0, 2 * n_photons] = 1.0 / math.sqrt(2.0)
    return FockCoefficients(c)


def squeezed_product(
    mean_photons: float,
    cutoff: int | None = None,
    truncation_tol: float = DEFAULT_TRUNCATION_TOL,
    squeeze_phase: float = 0.0,
) -> FockCoefficients:
    """Product of identical single-mode squeezed vacua, per-mode ``sinh(r)**2 = mean_photons``.

    Per-mode amplitudes vanish on odd numbers;
    ``s[2k] = sqrt((2k)!)/(2**k k!) * (-e^{i phase} tanh r)**k / sqrt(cosh r)``.
    """
    if mean_photons < 0.0:
        raise ValueError("mean_photons must be non-negative")
    sinh_r = math.sqrt(mean_photons)
    cosh_r = math.sqrt(1.0 + mean_photons)
    tanh_r = sinh_r / cosh_r
    factor = -tanh_r * complex(math.cos(squeeze_phase), math.sin(squeeze_phase))

    def amplitudes(c: int) -> np.ndarray:
        s = np.zeros(c + 1, dtype=complex)
        s[0] = 1.0 / math.sqrt(cosh_r)
        term = s[0]
        for k in range(1, c // 2 + 1):
            # s[2k]/s[2k-2] = sqrt((2k-1)/(2k)) * factor
            term = term * factor * math.sqrt((2 * k - 1) / (2 * k))
            s[2 * k] = term
        return s

    if cutoff is None:
        cutoff = 16
        while True:
            s = amplitudes(cutoff)
            mode_mass = float(np.sum(np.abs(s) ** 2))
            if 1.0 - mode_mass * mode_mass < truncation_tol:
                break
            if cutoff >= _MAX_AUTO_CUTOFF:
                raise TruncationError(
                    f"squeezed_product: cannot reach tolerance {truncation_tol:.1e} "
                    f"below cutoff {_MAX_AUTO_CUTOFF}"
                )
            cutoff *= 2
    else:
        s = amplitudes(cutoff)
        mode_mass = float(np.sum(np.abs(s) ** 2))
        _check_truncation(1.0 - mode_mass * mode_mass, cutoff, truncation_tol,
                          "squeezed_product")
    return FockCoefficients(np.outer(s, s))


def statistics(state: FockCoefficients) -> PhotonStatistics:
    """Mandel Q (mode a), difference-noise sigma and mode correlation J.

    All moments are raw sums over ``|C|**2``; for well-truncated states the
    missing tail mass is below the constructor tolerance.  When a mode has
    zero number variance, J is reported as its limiting value 1.
    """
    p = np.abs(state.coeffs) ** 2
    idx = np.arange(p.shape[0], dtype=float)
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    mean_a = float(idx @ pa)
    mean_b = float(idx @ pb)
    if mean_a <= 0.0 or mean_b <= 0.0:
        raise UndefinedStatisticsError(
            "counting statistics need a nonzero mean photon number in each mode"
        )
    var_a = max(0.0, float(idx * idx @ pa) - mean_a * mean_a)
    var_b = max(0.0, float(idx * idx @ pb) - mean_b * mean_b)
    cov = float(idx @ p @ idx) - mean_a * mean_b
    q_mandel = var_a / mean_a - 1.0
    sigma = max(0.0, (var_a + var_b - 2.0 * cov) / (mean_a + mean_b))
    if var_a == 0.0 or var_b == 0.0:
        j_corr = 1.0
    else:
        j_corr = cov / math.sqrt(var_a * var_b)
        j_corr = min(1.0, max(-1.0, j_corr))
    return PhotonStatistics(mean_a=mean_a, mean_b=mean_b, q_mandel=q_mandel,
                            sigma=sigma, j_corr=j_corr)


def is_twin_mode(state: FockCoefficients, tol: float = 1e-12) -> bool:
    """Whether ``|C[n, m]|`` is symmetric under mode exchange."""
    mags = np.abs(state.coeffs)
    return bool(np.max(np.abs(mags - mags.T)) <= tol)


def is_path_symmetric(state: FockCoefficients, chi0: float = 0.0, tol: float = 1e-12) -> bool:
    """Whether ``C[n, m] = conj(C[m, n]) * exp(-2i chi0)``.

    A stronger, phase-sensitive symmetry than :func:`is_twin_mode`; nothing
    in the intensity-difference analysis depends on it, it is offered as a
    diagnostic predicate only.
    """
    c = state.coeffs
    target = np.conj(c.T) * complex(math.cos(-2.0 * chi0), math.sin(-2.0 * chi0))
    return bool(np.max(np.abs(c - target)) <= tol)


def save_coefficients(state: FockCoefficients, dest) -> None:
    """Dump the expansion as ``n,m,re,im`` CSV rows (all entries)."""
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        fh.write("n,m,re,im\n")
        c = state.coeffs
        for n in range(c.shape[0]):
            for m in range(c.shape[1]):
                fh.write(f"{n},{m},{float(c[n, m].real)!r},{float(c[n, m].imag)!r}\n")
    finally:
        if own:
            fh.close()


def load_coefficients(src) -> FockCoefficients:
    """Read back a dump produced by :func:`save_coefficients`."""
    own = isinstance(src, (str, bytes)) or hasattr(src, "__fspath__")
    fh = open(src, "r", encoding="utf-8") if own else src
    try:
        rows = []
        for line_number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("n,"):
                continue
            cells = line.split(",")
            if len(cells) != 4:
                raise ValueError(f"line {line_number}: expected n,m,re,im")
            n, m = int(cells[0]), int(cells[1])
            rows.append((n, m, float(cells[2]), float(cells[3])))
    finally:
        if own:
            fh.close()
    if not rows:
        raise ValueError("no coefficient rows found")
    size = max(max(n, m) for n, m, _, _ in rows) + 1
    c = np.zeros((size, size), dtype=complex)
    for n, m, re, im in rows:
        c[n, m] = complex(re, im)
    return FockCoefficients(c)
