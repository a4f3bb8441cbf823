"""Six-transition structure of the 14.4 keV Moessbauer sextet.

Hyperfine splittings are direct inputs in units of gamma; the 33 T
alpha-iron values ship as a preset. The table layout is generic: any set of
{Clebsch-Gordan weight, energy offset, polarization class} rows works for
other isotopes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptedTableError, InvalidEnsembleError, InvalidParametersError
from .geometry import TRANSITION_POLARIZATIONS, normalize

# alpha-iron internal hyperfine field of about 33 T
FE57_33T = {"delta_g": 39.7, "delta_e": 22.4}

BRANCHING_TOL = 1e-12


@dataclass(frozen=True)
class HyperfineConfig:
    """Ground/excited Zeeman splittings and magnetization direction.

    Unmagnetized means delta_g = delta_e = 0 with no axis; downstream code
    then picks a dummy quantization axis and the results are axis
    independent (for equal ground populations).
    """

    delta_g: float = 0.0      # adjacent ground sublevel spacing, units gamma
    delta_e: float = 0.0      # adjacent excited sublevel spacing, units gamma
    axis: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.delta_g < 0.0 or self.delta_e < 0.0:
            raise InvalidParametersError("hyperfine splittings must be nonnegative")
        if self.axis is None:
            if self.delta_g != 0.0 or self.delta_e != 0.0:
                raise InvalidParametersError(
                    "magnetized splittings require a magnetization axis"
                )
        else:
            ax = normalize(self.axis)
            if np.max(np.abs(ax.imag)) > 1e-12:
                raise InvalidParametersError("magnetization axis must be real")
            ax = ax.real.astype(float)
            ax.setflags(write=False)
            object.__setattr__(self, "axis", ax)

    @property
    def magnetized(self) -> bool:
        return self.axis is not None

    @classmethod
    def fe57_33t(cls, axis) -> "HyperfineConfig":
        return cls(delta_g=FE57_33T["delta_g"], delta_e=FE57_33T["delta_e"], axis=axis)


@dataclass(frozen=True)
class TransitionRecord:
    """One allowed M1 transition of the sextet."""

    mu: int               # transition index 1..6
    ground: int           # ground sublevel index 1..2
    excited: int          # excited sublevel index 1..4
    energy: float         # offset from the bare resonance, units gamma
    cg: float             # Clebsch-Gordan coefficient c_mu
    polarization: str     # sigma-, pi0 or sigma+


# (ground, excited, energy coefficients (x delta_g, x delta_e), cg^2) per mu
_TABLE = (
    (1, 1, -0.5, -1.5, 1.0),
    (1, 2, -0.5, -0.5, 2.0 / 3.0),
    (1, 3, -0.5, +0.5, 1.0 / 3.0),
    (2, 2, +0.5, -0.5, 1.0 / 3.0),
    (2, 3, +0.5, +0.5, 2.0 / 3.0),
    (2, 4, +0.5, +1.5, 1.0),
)


def transition_table(hyperfine: HyperfineConfig) -> tuple[TransitionRecord, ...]:
    """The six transitions for the given splittings, ordered by mu.

    Energies are antisymmetric under mu -> 7 - mu and the Clebsch-Gordan
    weights symmetric, reflecting the mirror structure of the sextet.
    """
    records = []
    for mu, (g_idx, e_idx, cg_coeff, ce_coeff, cg2) in enumerate(_TABLE, start=1):
        records.append(
            TransitionRecord(
                mu=mu,
                ground=g_idx,
                excited=e_idx,
                energy=cg_coeff * hyperfine.delta_g + ce_coeff * hyperfine.delta_e,
                cg=np.sqrt(cg2),
                polarization=TRANSITION_POLARIZATIONS[mu - 1],
            )
        )
    return tuple(records)


def branching_check(records) -> None:
    """Verify that each excited level decays with total weight one.

    The squared Clebsch-Gordan coefficients of all transitions leaving one
    excited sublevel must sum to 1; anything else means a corrupted table.
    Independent of the splittings.
    """
    records = tuple(records)
    if len(records) != 6:
        raise CorruptedTableError(f"expected 6 transitions, got {len(records)}")
    for excited in sorted({r.excited for r in records}):
        total = sum(r.cg ** 2 for r in records if r.excited == excited)
        if abs(total - 1.0) > BRANCHING_TOL:
            raise CorruptedTableError(
                f"decay weights of excited level {excited} sum to {total!r}, not 1"
            )


def ground_populations(n_total: float, split=None) -> tuple[float, float]:
    """Ground-sublevel populations (N1, N2).

    Without an explicit split, room-temperature thermal equilibrium is
    assumed: the Boltzmann factor across a few-hundred-neV splitting is
    indistinguishable from one, so N1 = N2 = N/2.
    """
    if n_total < 1:
        raise InvalidEnsembleError("need at least one nucleus")
    if split is None:
        return n_total / 2.0, n_total / 2.0
    n1, n2 = split
    if n1 < 0 or n2 < 0 or abs(n1 + n2 - n_total) > 1e-9 * max(1.0, n_total):
        raise InvalidEnsembleError(
            f"populations ({n1}, {n2}) do not sum to N = {n_total}"
        )
    return float(n1), float(n2)


@dataclass(frozen=True)
class EnsembleConfig:
    """Ensemble size, sublevel populations, optional nucleus positions.

    Positions are in units of the resonant wavelength and only matter for
    the full-quantum tier, where they set the coupling phase factors; the
    collective linear-response states absorb them. Default: all at the
    origin (every phase factor equals one).
    """

    n_total: float
    n1: float
    n2: float
    positions: np.ndarray | None = field(default=None)

    def __post_init__(self):
        ground_populations(self.n_total, (self.n1, self.n2))
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=float)
            if pos.shape != (int(self.n_total), 3):
                raise InvalidEnsembleError(
                    f"positions must have shape ({int(self.n_total)}, 3)"
                )
            pos.setflags(write=False)
            object.__setattr__(self, "positions", pos)

    @classmethod
    def thermal(cls, n_total: float) -> "EnsembleConfig":
        n1, n2 = ground_populations(n_total)
        return cls(n_total=n_total, n1=n1, n2=n2)
