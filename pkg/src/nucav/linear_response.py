"""Effective few-level system and steady-state reflectance in linear response.

A weak probe reduces the N-nucleus problem to one collective ground state
coupled to at most six collective excited states. The steady-state
coherences x solve A(Delta) x = b with

    A[mu, nu] = (Delta - E_mu + i gamma/2) delta_mu_nu + (i zeta_s - delta_ls) W[mu, nu]

and the reflectance is R = R_el + out_prefactor * (D . x). The unmagnetized
special case collapses to a single collective state with the closed form
implemented in two_level_reflectance, which serves as the solver's oracle.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import backend
from .cavity import (
    CavityParams,
    CouplingParams,
    cavity_detuning_exact,
    cavity_detuning_linear,
    effective_constants,
    electronic_reflection,
)
from .ensemble import HyperfineConfig, transition_table
from .errors import DegenerateSpectrumError, InvalidParametersError, NotApplicableError
from .geometry import (
    ExperimentGeometry,
    build_frame,
    dipole_vectors,
    projected_overlap,
    transverse_projector,
)

CONDITION_LIMIT = 1e12
DEFAULT_DETUNING_GRID = np.linspace(-200.0, 200.0, 2001)


@dataclass(frozen=True)
class EffectiveLevelSystem:
    """Collective level system at one fixed cavity detuning.

    energies: transition offsets E_mu (units gamma)
    drive: b_mu = Omega g c_mu sqrt(N_mu) (d_mu* . P . a_in)
    coupling: W[mu, nu] = |g|^2 c_mu c_nu sqrt(N_mu N_nu) (d_mu* . P . d_nu),
        Hermitian and positive semidefinite (Gram matrix)
    detection: D_mu = g* c_mu sqrt(N_mu) (a_out* . P . d_mu)
    r_el: electronic (empty-cavity) reflection amplitude
    All arrays are read-only; instances are safe for concurrent use.
    """

    energies: np.ndarray
    drive: np.ndarray
    coupling: np.ndarray
    detection: np.ndarray
    delta_ls: float
    zeta_s: float
    gamma: float
    r_el: complex
    kappa: float
    kappa_r: float
    delta_c: float
    a_in: complex
    pol_overlap: complex
    drive_unit: np.ndarray = field(repr=False)   # drive / Omega, used by scans

    def __post_init__(self):
        for name in ("energies", "drive", "coupling", "detection", "drive_unit"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def out_prefactor(self) -> complex:
        """-i sqrt(2 kappa_r) / ((kappa + i Delta_C) a_in); cancels a_in in R."""
        return -1j * np.sqrt(2.0 * self.kappa_r) / ((self.kappa + 1j * self.delta_c) * self.a_in)


@dataclass(frozen=True)
class CollectiveParams:
    """Collective Lamb shift and superradiant broadening of the single line."""

    lamb_shift: float      # Delta_LS = (2/3) delta_ls N |g|^2
    superradiance: float   # gamma_S = (4/3) zeta_s N |g|^2


@dataclass
class Spectrum:
    """Scan result: abscissa, complex reflectance, intensity, metadata."""

    abscissa: np.ndarray
    reflectance: np.ndarray
    abs2: np.ndarray
    metadata: dict


def build_effective_system(
    geom: ExperimentGeometry,
    cav: CavityParams,
    coupling: CouplingParams,
    hyperfine: HyperfineConfig,
    delta_c: float = 0.0,
    a_in: complex = 1.0,
    gamma: float = 1.0,
    quantization_axis=None,
    azimuth: float = 0.0,
    records=None,
) -> EffectiveLevelSystem:
    """Assemble the collective level system from geometry, cavity and nuclei.

    For an unmagnetized sample the quantization axis is a dummy; it defaults
    to a1 and any other choice changes the reflectance only at rounding
    level (equal ground populations assumed). The azimuth rotates the
    in-plane dipole frame and is likewise pure gauge. A custom transition
    table (any isotope's weights, offsets and polarization classes) may be
    passed via `records`.
    """
    cav.validate()
    if hyperfine.axis is not None:
        axis = hyperfine.axis
    elif quantization_axis is not None:
        axis = quantization_axis
    else:
        axis = geom.b_axis if geom.b_axis is not None else geom.a1

    records = transition_table(hyperfine) if records is None else tuple(records)
    dipoles = dipole_vectors(axis, azimuth, classes=[r.polarization for r in records])
    proj = transverse_projector(geom.k)
    const = effective_constants(cav, delta_c, a_in)

    pops = np.array([coupling.n1 if r.ground == 1 else coupling.n2 for r in records])
    cg = np.array([r.cg for r in records])
    energies = np.array([r.energy for r in records])
    weight = cg * np.sqrt(pops)

    # scalar-arithmetic products keep decoupled blocks at exact zero
    d_in = np.array([projected_overlap(d, proj, geom.a_in) for d in dipoles])
    out_d = np.array([projected_overlap(geom.a_out, proj, d) for d in dipoles])
    gram = np.array([[projected_overlap(di, proj, dj) for dj in dipoles] for di in dipoles])

    drive_unit = coupling.g * weight * d_in
    return EffectiveLevelSystem(
        energies=energies,
        drive=const.drive * drive_unit,
        coupling=abs(coupling.g) ** 2 * np.outer(weight, weight) * gram,
        detection=np.conj(coupling.g) * weight * out_d,
        delta_ls=const.delta_ls,
        zeta_s=const.zeta_s,
        gamma=gamma,
        r_el=electronic_reflection(cav, delta_c, geom.a_in, geom.a_out),
        kappa=cav.kappa,
        kappa_r=cav.kappa_r,
        delta_c=delta_c,
        a_in=complex(a_in),
        pol_overlap=complex(np.vdot(geom.a_out, geom.a_in)),
        drive_unit=drive_unit,
    )


def coherence_matrix(system: EffectiveLevelSystem, delta: float) -> np.ndarray:
    """The 6x6 system matrix A(Delta) of the steady-state equations."""
    a = (1j * system.zeta_s - system.delta_ls) * system.coupling
    np.fill_diagonal(a, np.diag(a) + delta - system.energies + 0.5j * system.gamma)
    return a


def steady_coherences(system: EffectiveLevelSystem, delta: float) -> np.ndarray:
    """Steady-state coherences <E_mu|rho|G> at probe detuning delta.

    Solves A(Delta) x = b with partial pivoting. A condition number beyond
    1e12 signals a degenerate spectrum (physically: gamma = 0), reported
    with the offending detuning rather than returning garbage.
    """
    a = coherence_matrix(system, delta)
    if np.linalg.cond(a) > CONDITION_LIMIT:
        raise DegenerateSpectrumError(delta)
    x = np.linalg.solve(a, system.drive)
    rhs_norm = np.linalg.norm(system.drive)
    if rhs_norm > 0 and np.linalg.norm(a @ x - system.drive) > 1e-10 * rhs_norm:
        raise DegenerateSpectrumError(delta, f"solver residual too large at delta={delta}")
    return x


def reflectance(system: EffectiveLevelSystem, delta: float) -> complex:
    """Complex reflection coefficient R(Delta); independent of a_in."""
    x = steady_coherences(system, delta)
    return complex(system.r_el + system.out_prefactor * (system.detection @ x))


def two_level_reflectance(
    delta,
    kappa: float,
    kappa_r: float,
    delta_c: float,
    ng2: float,
    gamma: float = 1.0,
    pol_overlap: complex = 1.0,
):
    """Closed-form reflectance of the unmagnetized layer.

    Electronic term plus a single collective Lorentzian
    ~ 1 / (Delta - Delta_LS + i (gamma + gamma_S)/2). Exact for
    delta_g = delta_e = 0 and equal ground populations; used as the
    independent oracle for the six-level solver.
    """
    delta = np.asarray(delta, dtype=float)
    z = kappa + 1j * delta_c
    denom2 = kappa ** 2 + delta_c ** 2
    zeta_s = kappa / denom2
    delta_ls = -delta_c / denom2
    q = (2.0 / 3.0) * ng2
    resonance = delta + 0.5j * gamma + q * (1j * zeta_s - delta_ls)
    r = (2.0 * kappa_r / z - 1.0) * pol_overlap - 1j * (2.0 * kappa_r / z ** 2) * pol_overlap * q / resonance
    return r if r.shape else complex(r)


def collective_parameters(cav: CavityParams, coupling: CouplingParams, delta_c: float) -> CollectiveParams:
    """Lamb shift and superradiant width of the collective line."""
    const = effective_constants(cav, delta_c)
    return CollectiveParams(
        lamb_shift=(2.0 / 3.0) * const.delta_ls * coupling.ng2,
        superradiance=(4.0 / 3.0) * const.zeta_s * coupling.ng2,
    )


def _require_monotone(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1:
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise InvalidParametersError("scan grid must be strictly monotone")
    return grid


def _run_scan(system: EffectiveLevelSystem, deltas, delta_c_points) -> tuple[np.ndarray, list]:
    r, ok = backend.scan_reflectance(
        system.energies,
        system.gamma,
        system.coupling,
        system.drive_unit,
        system.detection,
        np.ascontiguousarray(deltas, dtype=float),
        np.ascontiguousarray(delta_c_points, dtype=float),
        system.kappa,
        system.kappa_r,
        system.pol_overlap,
    )
    failures = [float(d) for d in np.asarray(deltas)[ok == 0]]
    return r, failures


def scan_detuning(
    geom: ExperimentGeometry,
    cav: CavityParams,
    coupling: CouplingParams,
    hyperfine: HyperfineConfig,
    deltas=DEFAULT_DETUNING_GRID,
    couple_delta_c: bool = False,
    phi_mrad: float | None = None,
    a_in: complex = 1.0,
    gamma: float = 1.0,
    quantization_axis=None,
    azimuth: float = 0.0,
) -> Spectrum:
    """Reflectance spectrum over a probe-detuning grid at fixed angle.

    By default the cavity detuning is the linearized slope * (phi - phi0),
    constant across the scan. With couple_delta_c the exact mode formula is
    used instead, so Delta_C follows the probe frequency; near resonance the
    two differ negligibly because the cavity background is flat on the
    scale of the nuclear line. Failed points (singular system) are recorded
    in metadata["failed_points"], not fatal.
    """
    deltas = _require_monotone(deltas)
    phi = cav.phi0_mrad if phi_mrad is None else phi_mrad
    dphi_urad = (phi - cav.phi0_mrad) * 1e3
    if couple_delta_c:
        w0 = cav.omega0_gamma
        delta_c_points = cavity_detuning_exact(w0 + deltas, phi * 1e-3, cav.phi0_mrad * 1e-3, w0)
        base_delta_c = float(cavity_detuning_exact(w0, phi * 1e-3, cav.phi0_mrad * 1e-3, w0))
    else:
        base_delta_c = float(cavity_detuning_linear(dphi_urad, cav.detuning_slope))
        delta_c_points = np.full(deltas.shape, base_delta_c)

    system = build_effective_system(
        geom, cav, coupling, hyperfine, base_delta_c, a_in, gamma, quantization_axis, azimuth
    )
    r, failures = _run_scan(system, deltas, delta_c_points)
    return Spectrum(
        abscissa=deltas,
        reflectance=r,
        abs2=r.real ** 2 + r.imag ** 2,
        metadata={
            "axis": "detuning_gamma",
            "couple_delta_c": couple_delta_c,
            "phi_mrad": phi,
            "failed_points": failures,
        },
    )


def scan_angle(
    geom: ExperimentGeometry,
    cav: CavityParams,
    coupling: CouplingParams,
    hyperfine: HyperfineConfig,
    phis_mrad,
    delta: float = 1e3,
    a_in: complex = 1.0,
    gamma: float = 1.0,
    quantization_axis=None,
    azimuth: float = 0.0,
) -> Spectrum:
    """Rocking curve |R(phi)|^2 at fixed probe detuning.

    Delta_C = detuning_slope * (phi - phi0), so the reflectance dips where
    the guided mode is resonantly excited. The minimum angle is recorded in
    metadata["minimum_angle_mrad"].
    """
    phis_mrad = _require_monotone(phis_mrad)
    delta_c_points = cavity_detuning_linear((phis_mrad - cav.phi0_mrad) * 1e3, cav.detuning_slope)
    system = build_effective_system(
        geom, cav, coupling, hyperfine, 0.0, a_in, gamma, quantization_axis, azimuth
    )
    r, failures = _run_scan(system, np.full(phis_mrad.shape, float(delta)), delta_c_points)
    abs2 = r.real ** 2 + r.imag ** 2
    finite = np.where(np.isfinite(abs2), abs2, np.inf)
    return Spectrum(
        abscissa=phis_mrad,
        reflectance=r,
        abs2=abs2,
        metadata={
            "axis": "angle_mrad",
            "delta_gamma": float(delta),
            "failed_points": failures,
            "minimum_angle_mrad": float(phis_mrad[int(np.argmin(finite))]),
        },
    )


@dataclass(frozen=True)
class SymmetricModeAnalysis:
    """Rates of the symmetric/antisymmetric pair of driven pi transitions."""

    gamma_plus: float     # superradiant decay of the driven symmetric state
    gamma_minus: float    # decay of the metastable antisymmetric state
    coupling: float       # energy coupling (delta_g + delta_e)/2 between them
    dip_location: float   # reflectance minimum between the two pi resonances


def symmetric_mode_analysis(system: EffectiveLevelSystem) -> SymmetricModeAnalysis:
    """Reduced 2x2 analysis for the geometry a_in || a_out || B (B transverse).

    Only the two linearly polarized transitions are driven, with equal
    weight, and their symmetric combination carries the full cavity-induced
    decay while the antisymmetric one keeps the bare gamma/2. Raises
    NotApplicableError for any other drive pattern.
    """
    b = system.drive
    scale = np.max(np.abs(b))
    if scale == 0.0:
        raise NotApplicableError("no transition is driven")
    pi_idx, other_idx = [1, 4], [0, 2, 3, 5]
    if np.max(np.abs(b[other_idx])) > 1e-9 * scale:
        raise NotApplicableError("sigma transitions are driven; not the symmetric pi geometry")
    if abs(b[1] - b[4]) > 1e-9 * scale:
        raise NotApplicableError("pi transitions unevenly driven (N1 != N2?)")
    w22, w55, w25 = (system.coupling[i, j] for i, j in ((1, 1), (4, 4), (1, 4)))
    if abs(w22 - w55) > 1e-9 * abs(w22) or abs(w25 - w22) > 1e-9 * abs(w22):
        raise NotApplicableError("pi-pi couplings lack the symmetric structure")

    gamma_plus = 0.5 * system.gamma + system.zeta_s * float(np.real(w22 + w25))
    e2, e5 = system.energies[1], system.energies[4]
    result = minimize_scalar(
        lambda d: abs(reflectance(system, d)) ** 2,
        bounds=(e2, e5),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return SymmetricModeAnalysis(
        gamma_plus=gamma_plus,
        gamma_minus=0.5 * system.gamma,
        coupling=0.5 * float(e5 - e2),
        dip_location=float(result.x),
    )


def canonical_geometries() -> dict[str, ExperimentGeometry]:
    """The four named polarization/magnetization alignments.

    Frame: k = x, a1 = z (surface normal), a2 = y.
      a: a_in || a_out || B = a1
      b: a_in || a_out = a1, B = a2 (perpendicular to both k and a_in)
      c: a_in || a1 - a2, a_out || a1 + a2, B = a2
      d: a_in || a1, a_out || a2, B || a2 + k
    In c and d the polarizers are crossed, so only the nuclear scattering
    reaches the detector.
    """
    z = np.array([0.0, 0.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0])
    frame = {"surface_normal": z, "propagation": x}
    return {
        "a": build_frame(**frame, a_in=z, a_out=z, b_axis=z),
        "b": build_frame(**frame, a_in=z, a_out=z, b_axis=y),
        "c": build_frame(**frame, a_in=z - y, a_out=z + y, b_axis=y),
        "d": build_frame(**frame, a_in=z, a_out=y, b_axis=y + x),
    }
