"""Physical parameters and the classical steady-state response.

All rates and frequencies inside the package are expressed in units of the
mechanical resonance frequency, so ``omega_m`` is 1.0 by default and a
coupling of 2.0 means "twice the mechanical frequency".  The two helpers
:func:`thermal_occupation` and :func:`drive_amplitude` are the only
functions that accept SI quantities; they convert laboratory numbers into
the dimensionless ones used everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import scipy.constants as const

from .errors import DomainError, SingularityError

#: Response denominators with modulus below this value (in units of
#: omega_m) are treated as exact poles and rejected.
POLE_THRESHOLD = 1e-12

#: Thermal occupations below this exponent cutoff underflow to zero.
_EXP_CUTOFF = 700.0


@dataclass(frozen=True)
class ExcitonParams:
    """One quantum-well exciton mode coupled to the cavity field.

    Parameters
    ----------
    g : float
        Exciton-cavity coupling rate.
    gamma : float
        Exciton decay rate, strictly positive.
    delta_ex : float
        Detuning of the exciton from the cavity resonance; may take either
        sign.
    """

    g: float
    gamma: float
    delta_ex: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"exciton decay rate must be positive, got {self.gamma}")


@dataclass(frozen=True)
class SystemParams:
    """Static parameters of the hybrid cavity.

    Parameters
    ----------
    kappa : float
        Cavity amplitude decay rate, strictly positive.
    gamma_m : float
        Mechanical damping rate, strictly positive.
    excitons : tuple[ExcitonParams, ExcitonParams]
        Exactly two quantum-well exciton modes.  A list is accepted and
        converted.
    n_th : float
        Thermal phonon occupation of the mechanical bath, non-negative.
    g0 : float
        Single-photon optomechanical coupling, non-negative.  Only needed
        when dressed couplings are derived from drive amplitudes.
    omega_m : float
        Mechanical resonance frequency.  It sets the unit system and is 1.0
        unless deliberately rescaled.
    """

    kappa: float
    gamma_m: float
    excitons: tuple[ExcitonParams, ExcitonParams]
    n_th: float = 0.0
    g0: float = 0.0
    omega_m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "excitons", tuple(self.excitons))
        if len(self.excitons) != 2:
            raise DomainError(f"expected exactly 2 exciton modes, got {len(self.excitons)}")
        if not self.kappa > 0:
            raise DomainError(f"cavity decay rate must be positive, got {self.kappa}")
        if not self.gamma_m > 0:
            raise DomainError(f"mechanical damping must be positive, got {self.gamma_m}")
        if self.n_th < 0:
            raise DomainError(f"thermal occupation must be non-negative, got {self.n_th}")
        if self.g0 < 0:
            raise DomainError(f"single-photon coupling must be non-negative, got {self.g0}")
        if not self.omega_m > 0:
            raise DomainError(f"mechanical frequency must be positive, got {self.omega_m}")


@dataclass(frozen=True)
class DriveTone:
    """One drive tone, detuned from the cavity by plus or minus omega_m.

    Parameters
    ----------
    amplitude : complex
        Drive amplitude epsilon.  A real value must be non-negative; a
        complex value is allowed because only its modulus affects the
        dressed couplings.
    detuning_sign : str
        "plus" for the tone above the cavity resonance, "minus" for the
        tone below it.
    cavity_offset : float, optional
        Rotating-frame offset omega_a - omega_drive.  Defaults to
        -omega_m for the plus tone and +omega_m for the minus tone, the
        exact two-tone condition.  Override to model imperfect tuning.
    """

    amplitude: complex
    detuning_sign: str
    cavity_offset: float | None = None

    def __post_init__(self):
        if self.detuning_sign not in ("plus", "minus"):
            raise DomainError(
                f"detuning_sign must be 'plus' or 'minus', got {self.detuning_sign!r}"
            )
        amp = complex(self.amplitude)
        if amp.imag == 0.0 and amp.real < 0:
            raise DomainError(f"real drive amplitude must be non-negative, got {amp.real}")

    def resolved_offset(self, omega_m: float) -> float:
        """Rotating-frame offset, applying the two-tone default if unset."""
        if self.cavity_offset is not None:
            return self.cavity_offset
        return -omega_m if self.detuning_sign == "plus" else omega_m


@dataclass(frozen=True)
class SteadyAmplitudes:
    """Classical steady-state amplitudes and the dressed couplings.

    ``a_plus``/``a_minus`` are the intracavity amplitudes driven by each
    tone, ``c_plus``/``c_minus`` the corresponding exciton amplitudes (one
    per well), and ``G_plus``/``G_minus`` the dressed optomechanical
    couplings g0*|a|.
    """

    a_plus: complex
    a_minus: complex
    c_plus: tuple[complex, complex]
    c_minus: tuple[complex, complex]
    G_plus: float
    G_minus: float


def thermal_occupation(temperature: float, omega_m: float) -> float:
    """Bose-Einstein occupation of a mode at ``omega_m`` (SI units).

    Parameters
    ----------
    temperature : float
        Bath temperature in kelvin, non-negative.
    omega_m : float
        Angular frequency in rad/s, strictly positive.

    Returns
    -------
    float
        1/(exp(hbar*omega_m/(k_B*T)) - 1), evaluated with ``expm1`` so the
        small-exponent regime keeps full precision.  Zero temperature and
        exponents past the overflow cutoff both return exactly 0.0.
    """
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if not omega_m > 0:
        raise DomainError(f"frequency must be positive, got {omega_m}")
    if temperature == 0:
        return 0.0
    x = const.hbar * omega_m / (const.k * temperature)
    if x > _EXP_CUTOFF:
        return 0.0
    return 1.0 / math.expm1(x)


def drive_amplitude(power: float, kappa: float, tone_frequency: float) -> float:
    """Drive amplitude sqrt(kappa * P / (hbar * omega)) from SI inputs.

    Parameters
    ----------
    power : float
        Input laser power in watts, non-negative.
    kappa : float
        Cavity decay rate in rad/s, strictly positive.
    tone_frequency : float
        Angular frequency of the tone in rad/s, strictly positive.
    """
    if power < 0:
        raise DomainError(f"power must be non-negative, got {power}")
    if not kappa > 0:
        raise DomainError(f"cavity decay rate must be positive, got {kappa}")
    if not tone_frequency > 0:
        raise DomainError(f"tone frequency must be positive, got {tone_frequency}")
    return math.sqrt(kappa * power / (const.hbar * tone_frequency))


def _tone_response(
    params: SystemParams,
    tone: DriveTone,
    deltas: tuple[float, float],
) -> tuple[complex, tuple[complex, complex]]:
    """Intracavity and exciton amplitudes for a single tone.

    ``deltas`` are the exciton detunings seen in this tone's rotating
    frame.  They are independent inputs rather than values derived from
    ``delta_ex`` because the relevant frame depends on which sideband the
    tone addresses.
    """
    deltas = tuple(float(d) for d in deltas)
    if len(deltas) != 2:
        raise DomainError(f"expected one detuning per exciton mode, got {len(deltas)}")

    well_dens = []
    for i, (well, delta) in enumerate(zip(params.excitons, deltas)):
        den = complex(well.gamma, delta)
        if abs(den) < POLE_THRESHOLD:
            raise SingularityError(
                f"exciton {i + 1} response pole for the {tone.detuning_sign} tone: "
                f"|gamma + i*delta| = {abs(den):.3e} < {POLE_THRESHOLD:.0e}",
                tone=tone.detuning_sign,
            )
        well_dens.append(den)

    den_cav = complex(params.kappa, tone.resolved_offset(params.omega_m))
    den_cav += sum(well.g**2 / d for well, d in zip(params.excitons, well_dens))
    if abs(den_cav) < POLE_THRESHOLD:
        raise SingularityError(
            f"cavity response pole for the {tone.detuning_sign} tone: "
            f"|denominator| = {abs(den_cav):.3e} < {POLE_THRESHOLD:.0e}",
            tone=tone.detuning_sign,
        )

    a = complex(tone.amplitude) / den_cav
    c = tuple(-1j * well.g * a / d for well, d in zip(params.excitons, well_dens))
    return a, c


def steady_amplitudes(
    params: SystemParams,
    tone_plus: DriveTone,
    tone_minus: DriveTone,
    delta_plus: tuple[float, float],
    delta_minus: tuple[float, float],
) -> SteadyAmplitudes:
    """Classical steady state under two-tone driving.

    Each tone sees the cavity filtered through both exciton modes:

        a = epsilon / (kappa + i*offset + sum_i g_i^2 / (gamma_i + i*delta_i))
        c_i = -i * g_i * a / (gamma_i + i*delta_i)

    where ``offset`` is the rotating-frame detuning of the tone from the
    cavity (+-omega_m at the exact two-tone condition) and ``delta_plus``
    and ``delta_minus`` give the exciton detunings in each tone's frame.
    The dressed couplings are G = g0 * |a|, so they are invariant under a
    global phase rotation of the drive.

    Raises
    ------
    SingularityError
        If any response denominator has modulus below
        :data:`POLE_THRESHOLD`.  The error names the offending tone.
    """
    if tone_plus.detuning_sign != "plus":
        raise DomainError("tone_plus must have detuning_sign='plus'")
    if tone_minus.detuning_sign != "minus":
        raise DomainError("tone_minus must have detuning_sign='minus'")

    a_p, c_p = _tone_response(params, tone_plus, delta_plus)
    a_m, c_m = _tone_response(params, tone_minus, delta_minus)
    return SteadyAmplitudes(
        a_plus=a_p,
        a_minus=a_m,
        c_plus=c_p,
        c_minus=c_m,
        G_plus=params.g0 * abs(a_p),
        G_minus=params.g0 * abs(a_m),
    )
