import numpy as np
import pytest

from nucav.cavity import (
    CavityParams,
    CouplingParams,
    cavity_detuning_exact,
    cavity_detuning_linear,
    effective_constants,
    electronic_reflection,
    validate,
)
from nucav.errors import EnergyConservationError, InvalidParametersError

Z = np.array([0.0, 0.0, 1.0], dtype=complex)
Y = np.array([0.0, 1.0, 0.0], dtype=complex)

CALIBRATED = dict(kappa=45.0, kappa_r=25.0, kappa_t=10.0, detuning_slope=-0.5, phi0_mrad=2.96)


def test_validate_accepts_calibrated_set():
    validate(CavityParams(**CALIBRATED))


def test_validate_energy_conservation():
    with pytest.raises(EnergyConservationError):
        validate(CavityParams(kappa=45.0, kappa_r=25.0, kappa_t=25.0))


def test_validate_positive_kappa():
    with pytest.raises(InvalidParametersError):
        validate(CavityParams(kappa=0.0, kappa_r=0.0))


def test_detuning_exact_resonant_mode_zero():
    p = CavityParams(**CALIBRATED)
    w0 = p.omega0_gamma
    phi0 = p.phi0_mrad * 1e-3
    assert cavity_detuning_exact(w0, phi0, phi0, w0) == 0.0


def test_detuning_exact_first_order_slope():
    # at 1 urad off the mode angle the exact detuning is about -omega0*phi0*dphi
    p = CavityParams(**CALIBRATED)
    w0 = p.omega0_gamma
    phi0 = p.phi0_mrad * 1e-3
    dphi = 1e-6
    exact = cavity_detuning_exact(w0, phi0 + dphi, phi0, w0)
    linearized = -w0 * phi0 * dphi          # about -9.07e3 gamma = -2.96e-9 * omega0
    assert exact < 0.0
    assert abs(exact - linearized) < 0.01 * abs(linearized)


def test_detuning_exact_sign_pattern():
    p = CavityParams(**CALIBRATED)
    w0 = p.omega0_gamma
    phi0 = p.phi0_mrad * 1e-3
    assert cavity_detuning_exact(w0, phi0 - 5e-6, phi0, w0) > 0.0
    assert cavity_detuning_exact(w0, phi0 + 5e-6, phi0, w0) < 0.0


def test_detuning_linear_values():
    assert cavity_detuning_linear(0.0, -9000.0) == 0.0
    # slope -0.5 per urad at scale 18000 gives -9000 gamma per urad
    assert cavity_detuning_linear(1.0, -0.5 * 18000.0) == -9000.0


def test_detuning_linear_matches_exact_with_matched_slope():
    # with the slope read off the exact formula, the residual is pure curvature,
    # below 1% out to 50 urad
    p = CavityParams(**CALIBRATED)
    w0 = p.omega0_gamma
    phi0 = p.phi0_mrad * 1e-3
    slope = -w0 * phi0 * 1e-6  # per urad
    for dphi_urad in (-50.0, -10.0, 1.0, 10.0, 50.0):
        exact = cavity_detuning_exact(w0, phi0 + dphi_urad * 1e-6, phi0, w0)
        lin = cavity_detuning_linear(dphi_urad, slope)
        assert abs(lin - exact) < 0.01 * abs(exact)


def test_detuning_linear_convergence_rate():
    # relative error of the linearization vanishes as dphi -> 0
    p = CavityParams(**CALIBRATED)
    w0 = p.omega0_gamma
    phi0 = p.phi0_mrad * 1e-3
    slope = -w0 * phi0
    errors = []
    for dphi in (1e-5, 1e-6, 1e-7):
        exact = cavity_detuning_exact(w0, phi0 + dphi, phi0, w0)
        errors.append(abs((slope * dphi - exact) / exact))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-4


def test_detuning_exact_rejects_bad_angle():
    with pytest.raises(InvalidParametersError):
        cavity_detuning_exact(1.0, 0.0, 1e-3, 1.0)


def test_electronic_reflection_critical_coupling():
    p = CavityParams(kappa=50.0, kappa_r=25.0)
    assert abs(electronic_reflection(p, 0.0, Z, Z)) < 1e-15


def test_electronic_reflection_undercoupled_value():
    p = CavityParams(kappa=45.0, kappa_r=25.0)
    r = electronic_reflection(p, 0.0, Z, Z)
    assert abs(r - (50.0 / 45.0 - 1.0)) < 1e-15   # = 1/9


def test_electronic_reflection_crossed_polarizers():
    p = CavityParams(kappa=45.0, kappa_r=25.0)
    for delta_c in (0.0, 13.0, -2e5):
        assert electronic_reflection(p, delta_c, Z, Y) == 0.0


def test_electronic_reflection_bounded_when_valid():
    # |2 kr/(kappa + i dc) - 1| <= 1 whenever kappa >= kr
    rng = np.random.default_rng(1234)
    for _ in range(10_000):
        kappa = 10.0 ** rng.uniform(-1, 6)
        kappa_r = kappa * rng.uniform(0.0, 1.0)
        kappa_t = (kappa - kappa_r) * rng.uniform(0.0, 1.0)
        p = CavityParams(kappa=kappa, kappa_r=kappa_r, kappa_t=kappa_t)
        validate(p)
        delta_c = rng.uniform(-5, 5) * kappa
        assert abs(electronic_reflection(p, delta_c, Z, Z)) <= 1.0 + 1e-12


def test_effective_constants_on_resonance():
    p = CavityParams(**CALIBRATED)
    c = effective_constants(p, 0.0, a_in=1.0)
    assert c.delta_ls == 0.0
    assert c.zeta_s == pytest.approx(1.0 / 45.0, rel=1e-15)
    assert c.drive == pytest.approx(np.sqrt(50.0) / 45.0, rel=1e-15)


def test_effective_constants_detuned_by_kappa():
    p = CavityParams(**CALIBRATED)
    c = effective_constants(p, 45.0)
    assert c.zeta_s == pytest.approx(1.0 / 90.0, rel=1e-15)
    assert c.delta_ls == pytest.approx(-1.0 / 90.0, rel=1e-15)


def test_effective_constants_zero_drive():
    c = effective_constants(CavityParams(**CALIBRATED), 12.0, a_in=0.0)
    assert c.drive == 0.0


def test_effective_constants_parity():
    p = CavityParams(**CALIBRATED)
    for delta_c in (0.5, 7.0, 450.0):
        plus = effective_constants(p, delta_c)
        minus = effective_constants(p, -delta_c)
        assert plus.zeta_s == minus.zeta_s
        assert plus.delta_ls == -minus.delta_ls
        assert plus.zeta_s > 0.0
    peak = effective_constants(p, 0.0).zeta_s
    assert peak >= effective_constants(p, 1.0).zeta_s


def test_coupling_params_population_consistency():
    with pytest.raises(InvalidParametersError):
        CouplingParams(g=1.0, n_total=2.0, n1=1.0, n2=2.0)


def test_coupling_params_from_ng2():
    c = CouplingParams.from_ng2(1400.0)
    assert c.ng2 == pytest.approx(1400.0, rel=1e-15)
    assert c.n1 == c.n2 == c.n_total / 2.0
