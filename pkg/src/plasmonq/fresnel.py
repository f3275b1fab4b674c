"""TM reflection of a prism / metal film / analyte stack (Kretschmann coupling).

Fields evolve as ``e^{-i omega t}``; normal wave-vector components take the
branch ``Im(k_z) >= 0`` (ties broken toward ``Re(k_z) >= 0``) so evanescent
and absorbed waves decay.  Lengths are in nm, wave vectors in rad/nm,
angles in degrees.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .materials import DispersionTable, DrudeLorentzParams  # noqa: F401  (duck-typed metals)

__all__ = [
    "FresnelSingularityError",
    "NoInteriorExtremumError",
    "IncidenceGeometry",
    "KretschmannStack",
    "ReflectionResult",
    "resolve_permittivity",
    "tangential_wavevector",
    "wavevector_z",
    "interface_reflection",
    "reflection_coefficient",
    "transfer_matrix_reflection",
    "resonance_angle",
    "sensitivity",
    "inflection_index",
]


class FresnelSingularityError(ZeroDivisionError):
    """A reflection denominator vanished (degenerate interface or stack)."""


class NoInteriorExtremumError(ValueError):
    """A scanned extremum fell on the search boundary instead of inside it."""


def resolve_permittivity(metal, wavelength_nm: float) -> complex:
    """Turn a metal description into a complex permittivity.

    Accepts a plain complex number, any object with a
    ``permittivity(wavelength_nm)`` method (e.g. a dispersion table or a
    Drude-Lorentz parameter set), or a bare callable.
    """
    if isinstance(metal, (int, float, complex)):
        return complex(metal)
    method = getattr(metal, "permittivity", None)
    if callable(method):
        return complex(method(wavelength_nm))
    if callable(metal):
        return complex(metal(wavelength_nm))
    raise TypeError(f"cannot interpret {type(metal).__name__} as a metal permittivity")


@dataclass(frozen=True)
class IncidenceGeometry:
    """Internal incidence angle in the prism, degrees, strictly inside (0, 90)."""

    theta_deg: float

    def __post_init__(self):
        if not 0.0 < self.theta_deg < 90.0:
            raise ValueError(f"theta_deg={self.theta_deg} must lie strictly in (0, 90)")


@dataclass(frozen=True)
class KretschmannStack:
    """Three-layer sensing stack: prism | metal film | analyte."""

    n_prism: float
    metal: object
    thickness_nm: float
    n_analyte: float
    wavelength_nm: float

    def __post_init__(self):
        if not self.n_prism > 1.0:
            raise ValueError(f"n_prism={self.n_prism} must exceed 1")
        if not 0.0 < self.n_analyte < self.n_prism:
            raise ValueError(
                f"n_analyte={self.n_analyte} must lie in (0, n_prism={self.n_prism})"
            )
        if not self.thickness_nm > 0.0:
            raise ValueError("thickness_nm must be positive")
        if not self.wavelength_nm > 0.0:
            raise ValueError("wavelength_nm must be positive")
        # Resolve the film permittivity once; the stack wavelength is fixed.
        object.__setattr__(
            self, "_eps_metal", resolve_permittivity(self.metal, self.wavelength_nm)
        )

    @property
    def metal_permittivity(self) -> complex:
        return self._eps_metal

    @property
    def eps_prism(self) -> complex:
        return complex(self.n_prism * self.n_prism)

    @property
    def eps_analyte(self) -> complex:
        return complex(self.n_analyte * self.n_analyte)


@dataclass(frozen=True)
class ReflectionResult:
    """Complex TM reflection coefficient of the stack."""

    r_sp: complex

    @property
    def amplitude(self) -> float:
        return abs(self.r_sp)

    @property
    def phase(self) -> float:
        p = cmath.phase(self.r_sp)
        return math.pi if p == -math.pi else p

    @property
    def reflectance(self) -> float:
        a = abs(self.r_sp)
        return a * a


def tangential_wavevector(stack: KretschmannStack, geom: IncidenceGeometry) -> float:
    """Conserved in-plane wave vector k_x = (2 pi / lambda) n_prism sin(theta)."""
    k0 = 2.0 * math.pi / stack.wavelength_nm
    return k0 * stack.n_prism * math.sin(math.radians(geom.theta_deg))


def wavevector_z(epsilon: complex, k_x: float, wavelength_nm: float) -> complex:
    """Normal component sqrt(eps k0^2 - k_x^2) on the decaying branch."""
    k0 = 2.0 * math.pi / wavelength_nm
    kz = cmath.sqrt(epsilon * k0 * k0 - k_x * k_x)
    if kz.imag < 0.0 or (kz.imag == 0.0 and kz.real < 0.0):
        kz = -kz
    return kz


def interface_reflection(
    eps_l: complex, eps_m: complex, k_lz: complex, k_mz: complex, pair: str = "l|m"
) -> complex:
    """Single-interface TM (p-polarised) amplitude coefficient r_lm."""
    a = k_lz / eps_l
    b = k_mz / eps_m
    den = a + b
    if den == 0:
        raise FresnelSingularityError(
            f"vanishing TM admittance sum at interface {pair}"
        )
    return (a - b) / den


def _rsp(eps1, eps2, eps3, thickness_nm, k0, k_x):
    """Airy three-layer amplitude with pre-resolved permittivities."""
    kk = k0 * k0
    k1z = cmath.sqrt(eps1 * kk - k_x * k_x)
    if k1z.imag < 0.0 or (k1z.imag == 0.0 and k1z.real < 0.0):
        k1z = -k1z
    k2z = cmath.sqrt(eps2 * kk - k_x * k_x)
    if k2z.imag < 0.0 or (k2z.imag == 0.0 and k2z.real < 0.0):
        k2z = -k2z
    k3z = cmath.sqrt(eps3 * kk - k_x * k_x)
    if k3z.imag < 0.0 or (k3z.imag == 0.0 and k3z.real < 0.0):
        k3z = -k3z
    r12 = interface_reflection(eps1, eps2, k1z, k2z, pair="1|2")
    r23 = interface_reflection(eps2, eps3, k2z, k3z, pair="2|3")
    ph = cmath.exp(2j * k2z * thickness_nm)
    den = ph * r23 * r12 + 1.0
    if den == 0:
        raise FresnelSingularityError("vanishing composite denominator for stack 1|2|3")
    return (ph * r23 + r12) / den


def reflection_coefficient(stack: KretschmannStack, geom: IncidenceGeometry) -> ReflectionResult:
    """Three-layer TM reflection coefficient of the stack at ``geom``."""
    k0 = 2.0 * math.pi / stack.wavelength_nm
    k_x = tangential_wavevector(stack, geom)
    r = _rsp(
        stack.eps_prism,
        stack.metal_permittivity,
        stack.eps_analyte,
        stack.thickness_nm,
        k0,
        k_x,
    )
    return ReflectionResult(r_sp=r)


def transfer_matrix_reflection(layers, k_x: float, wavelength_nm: float) -> complex:
    """TM reflection of an arbitrary planar stack via 2x2 characteristic matrices.

    ``layers`` is a sequence of ``(epsilon, thickness_nm)`` ordered from the
    incidence medium to the substrate; the first and last thicknesses are
    ignored (semi-infinite).  Serves as an independent cross-check of
    :func:`reflection_coefficient` for the three-layer case.
    """
    if len(layers) < 2:
        raise ValueError("need at least incidence medium and substrate")
    kz = [wavevector_z(eps, k_x, wavelength_nm) for eps, _ in layers]
    q = []
    for (eps, _), kzl in zip(layers, kz):
        if eps == 0:
            raise FresnelSingularityError("zero permittivity layer")
        q.append(kzl / eps)
    m00, m01, m10, m11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for (eps, d), qq, kzl in zip(layers[1:-1], q[1:-1], kz[1:-1]):
        if qq == 0:
            raise FresnelSingularityError("vanishing TM admittance inside the stack")
        delta = kzl * d
        c = cmath.cos(delta)
        s = cmath.sin(delta)
        a01 = -1j * s / qq
        a10 = -1j * qq * s
        m00, m01, m10, m11 = (
            m00 * c + m01 * a10,
            m00 * a01 + m01 * c,
            m10 * c + m11 * a10,
            m10 * a01 + m11 * c,
        )
    top = m00 + m01 * q[-1]
    bot = m10 + m11 * q[-1]
    den = q[0] * top + bot
    if den == 0:
        raise FresnelSingularityError("singular characteristic matrix")
    return (q[0] * top - bot) / den


def _golden_minimize(f, a: float, b: float, tol: float) -> float:
    """Golden-section minimum of a unimodal f on [a, b] to absolute x tolerance."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = f(c)
    fd = f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _stack_constants(stack: KretschmannStack):
    k0 = 2.0 * math.pi / stack.wavelength_nm
    return stack.eps_prism, stack.metal_permittivity, stack.eps_analyte, k0


def resonance_angle(
    stack: KretschmannStack,
    theta_range: tuple[float, float] = (65.5, 83.5),
    tol: float = 1e-6,
    grid_points: int = 2001,
) -> float:
    """Angle of minimum reflectance inside ``theta_range`` (degrees).

    Scans a uniform grid and refines by golden section.  Raises
    :class:`NoInteriorExtremumError` when the grid minimum sits on a
    boundary, i.e. no dip is resolved inside the window.
    """
    lo, hi = theta_range
    if not (0.0 < lo < hi < 90.0):
        raise ValueError(f"theta_range {theta_range} must be ordered inside (0, 90)")
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    eps1, eps2, eps3, k0 = _stack_constants(stack)
    kxn = k0 * stack.n_prism

    def refl(theta_deg: float) -> float:
        r = _rsp(eps1, eps2, eps3, stack.thickness_nm, k0,
                 kxn * math.sin(math.radians(theta_deg)))
        return (r * r.conjugate()).real

    step = (hi - lo) / (grid_points - 1)
    values = [refl(lo + i * step) for i in range(grid_points)]
    i_min = min(range(grid_points), key=values.__getitem__)
    if i_min == 0 or i_min == grid_points - 1:
        raise NoInteriorExtremumError(
            f"reflectance minimum at theta grid boundary ({lo + i_min * step:.4f} deg)"
        )
    return _golden_minimize(refl, lo + (i_min - 1) * step, lo + (i_min + 1) * step, tol)


def sensitivity(
    stack: KretschmannStack,
    geom: IncidenceGeometry,
    n_analyte: float,
    h: float = 1e-6,
) -> float:
    """Central-difference derivative of reflectance with respect to n_analyte."""
    if h <= 0.0:
        raise ValueError("finite-difference step h must be positive")
    if not (0.0 < n_analyte - h and n_analyte + h < stack.n_prism):
        raise ValueError(
            f"n_analyte={n_analyte} with step h={h} leaves (0, n_prism) during differencing"
        )
    eps1, eps2, _, k0 = _stack_constants(stack)
    k_x = tangential_wavevector(stack, geom)

    def refl(n: float) -> float:
        r = _rsp(eps1, eps2, complex(n * n), stack.thickness_nm, k0, k_x)
        return (r * r.conjugate()).real

    return (refl(n_analyte + h) - refl(n_analyte - h)) / (2.0 * h)


# The reflectance has a square-root cusp where the analyte turns propagating
# (n = n_prism sin theta); its one-sided derivative diverges, so any
# finite-difference argmax would lock onto it.  The sensor operates under
# total internal reflection, strictly below that crossover.
_TIR_MARGIN = 1e-3


def inflection_index(
    stack: KretschmannStack,
    geom: IncidenceGeometry,
    n_range: tuple[float, float] = (1.333, 1.4422),
    tol: float = 1e-9,
    h: float = 1e-6,
    grid_points: int = 2001,
) -> float:
    """Analyte index maximising |d reflectance / d n| at fixed angle.

    This locates the steep flank of the resonance dip, the operating point
    used for precision estimates.  The scan covers ``n_range`` clipped to
    the total-internal-reflection regime ``n < n_prism sin(theta)`` where
    the attenuated-total-reflection scheme is defined.  Raises
    :class:`NoInteriorExtremumError` if the steepest point is not interior.
    """
    lo, hi = n_range
    if not (h < lo < hi < stack.n_prism - h):
        raise ValueError(f"n_range {n_range} must be ordered inside (h, n_prism - h)")
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    n_critical = stack.n_prism * math.sin(math.radians(geom.theta_deg))
    hi = min(hi, n_critical - _TIR_MARGIN)
    if hi <= lo:
        raise NoInteriorExtremumError(
            f"no total-internal-reflection window above n={lo} at "
            f"theta={geom.theta_deg} deg (crossover at {n_critical:.6f})"
        )
    eps1, eps2, _, k0 = _stack_constants(stack)
    k_x = tangential_wavevector(stack, geom)

    def refl(n: float) -> float:
        r = _rsp(eps1, eps2, complex(n * n), stack.thickness_nm, k0, k_x)
        return (r * r.conjugate()).real

    def neg_slope_mag(n: float) -> float:
        return -abs(refl(n + h) - refl(n - h)) / (2.0 * h)

    step = (hi - lo) / (grid_points - 1)
    values = [neg_slope_mag(lo + i * step) for i in range(grid_points)]
    i_min = min(range(grid_points), key=values.__getitem__)
    if i_min == 0 or i_min == grid_points - 1:
        raise NoInteriorExtremumError(
            f"steepest flank at n grid boundary ({lo + i_min * step:.6f})"
        )
    return _golden_minimize(
        neg_slope_mag, lo + (i_min - 1) * step, lo + (i_min + 1) * step, tol
    )
