"""Cavity-mode parameters, detuning models and adiabatic-elimination constants.

Internal unit system: all energies and rates in units of the single-nucleus
linewidth gamma (gamma == 1), angles in radians internally with mrad/urad at
the interface. The conversion constants (14.4 keV resonance, 4.7 neV
linewidth) are kept only to evaluate the exact angular dispersion.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EnergyConservationError, InvalidParametersError

OMEGA0_KEV = 14.4
GAMMA_NEV = 4.7


@dataclass(frozen=True)
class CavityParams:
    """Single guided mode of the thin-film waveguide.

    kappa is the total decay rate of either polarization mode, kappa_r and
    kappa_t the couplings into the reflected and transmitted channels.
    Internal loss makes up the difference, so kappa >= kappa_r + kappa_t is
    required by energy conservation. detuning_slope is the cavity detuning
    picked up per urad deviation from the mode angle phi0. xi records the
    overall scale factor of a parameter set; spectra are invariant under a
    common rescaling of (kappa, kappa_r, detuning_slope, N g^2).
    """

    kappa: float                    # total mode decay, units gamma
    kappa_r: float                  # reflection coupling, units gamma
    kappa_t: float = 0.0            # transmission coupling, units gamma
    detuning_slope: float = 0.0     # cavity detuning per urad, units gamma/urad
    phi0_mrad: float = 2.96         # resonance angle of the guided mode
    xi: float = 1.0                 # dimensionless scale factor (metadata)
    omega0_kev: float = OMEGA0_KEV
    gamma_nev: float = GAMMA_NEV

    @property
    def omega0_gamma(self) -> float:
        """Nuclear resonance energy expressed in units of gamma."""
        return self.omega0_kev * 1e3 / (self.gamma_nev * 1e-9)

    def validate(self) -> None:
        if not self.kappa > 0.0:
            raise InvalidParametersError(f"kappa must be positive (got {self.kappa})")
        if self.kappa_r < 0.0 or self.kappa_t < 0.0:
            raise InvalidParametersError("kappa_r and kappa_t must be nonnegative")
        if self.kappa < self.kappa_r + self.kappa_t:
            raise EnergyConservationError(
                f"kappa = {self.kappa} must be >= kappa_r + kappa_t = "
                f"{self.kappa_r + self.kappa_t}"
            )
        if not self.gamma_nev > 0.0 or not self.omega0_kev > 0.0:
            raise InvalidParametersError("omega0_kev and gamma_nev must be positive")


@dataclass(frozen=True)
class CouplingParams:
    """Nucleus-mode coupling g and ensemble composition.

    Only N |g|^2 and the ground-population split enter the reflectance, so
    scenarios may supply N g^2 directly via from_ng2.
    """

    g: complex            # single-nucleus coupling, units gamma
    n_total: float        # nucleus count N
    n1: float             # population of ground sublevel 1
    n2: float             # population of ground sublevel 2

    def __post_init__(self):
        if self.n_total < 0 or self.n1 < 0 or self.n2 < 0:
            raise InvalidParametersError("nucleus counts must be nonnegative")
        if abs(self.n1 + self.n2 - self.n_total) > 1e-9 * max(1.0, self.n_total):
            raise InvalidParametersError(
                f"N1 + N2 = {self.n1 + self.n2} must equal N = {self.n_total}"
            )
        if not np.isfinite(self.ng2):
            raise InvalidParametersError("N |g|^2 must be finite")

    @property
    def ng2(self) -> float:
        """Collective coupling strength N |g|^2 in units gamma^2."""
        return self.n_total * abs(self.g) ** 2

    @classmethod
    def from_ng2(cls, ng2: float, n_total: float = 2.0, split=None) -> "CouplingParams":
        """Build parameters that realize a given N |g|^2.

        The default equal split puts N/2 nuclei in each ground sublevel
        (thermal room-temperature populations).
        """
        if ng2 < 0:
            raise InvalidParametersError("N |g|^2 must be nonnegative")
        g = np.sqrt(ng2 / n_total) if n_total > 0 else 0.0
        n1, n2 = (n_total / 2.0, n_total / 2.0) if split is None else split
        return cls(g=complex(g), n_total=n_total, n1=n1, n2=n2)


def cavity_detuning_exact(omega: float, phi: float, phi0: float, omega0: float) -> float:
    """Cavity detuning from the resonant-mode wave vector, same units as omega.

    Delta_C = sqrt(omega^2 cos^2 phi + omega0^2 sin^2 phi0) - omega, written
    in a cancellation-free form: the difference of squares is
    omega0^2 sin^2 phi0 - omega^2 sin^2 phi. Angles in radians.
    """
    if not 0.0 < phi < np.pi / 2:
        raise InvalidParametersError("incidence angle must lie in (0, pi/2)")
    root = np.sqrt((omega * np.cos(phi)) ** 2 + (omega0 * np.sin(phi0)) ** 2)
    return ((omega0 * np.sin(phi0)) ** 2 - (omega * np.sin(phi)) ** 2) / (root + omega)


def cavity_detuning_linear(dphi_urad, detuning_slope: float):
    """Linearized cavity detuning delta_C * dphi, units gamma."""
    return detuning_slope * np.asarray(dphi_urad)


def electronic_reflection(params: CavityParams, delta_c, a_in_pol, a_out_pol) -> complex:
    """Empty-cavity reflection amplitude (2 kappa_r / (kappa + i Delta_C) - 1) (a_out* . a_in).

    Vanishes at critical coupling kappa = 2 kappa_r on resonance, and for
    crossed polarizations at any detuning.
    """
    if not params.kappa > 0.0:
        raise InvalidParametersError("kappa must be positive")
    overlap = complex(np.vdot(np.asarray(a_out_pol, dtype=complex), np.asarray(a_in_pol, dtype=complex)))
    z = params.kappa + 1j * np.asarray(delta_c)
    result = (2.0 * params.kappa_r / z - 1.0) * overlap
    return complex(result) if np.isscalar(delta_c) or np.ndim(delta_c) == 0 else result


@dataclass(frozen=True)
class EffectiveConstants:
    """Constants produced by adiabatically eliminating the cavity modes."""

    drive: complex      # Omega = sqrt(2 kappa_r) a_in / (kappa + i Delta_C)
    delta_ls: float     # Lamb-shift coefficient -Delta_C / (kappa^2 + Delta_C^2)
    zeta_s: float       # decay-enhancement coefficient kappa / (kappa^2 + Delta_C^2)


def effective_constants(params: CavityParams, delta_c: float, a_in: complex = 1.0) -> EffectiveConstants:
    """Drive, Lamb-shift and superradiance coefficients at cavity detuning delta_c.

    zeta_s + i delta_ls = 1 / (kappa + i Delta_C); zeta_s is strictly
    positive and even in Delta_C, delta_ls odd with the opposite sign.
    """
    if not params.kappa > 0.0:
        raise InvalidParametersError("kappa must be positive")
    denom = params.kappa ** 2 + delta_c ** 2
    return EffectiveConstants(
        drive=complex(np.sqrt(2.0 * params.kappa_r) * a_in / (params.kappa + 1j * delta_c)),
        delta_ls=-delta_c / denom,
        zeta_s=params.kappa / denom,
    )


def validate(params: CavityParams) -> None:
    """Raise with the violated constraint named; return None when valid."""
    params.validate()
