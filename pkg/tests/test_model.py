"""State preparation factors and the decoherence-exponent bookkeeping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeph import (
    QuadratureConfig,
    QubitBathParams,
    SpectralDensity,
    a_init,
    breakdown,
    breakdown_grid,
    exact_correlational_decoherence,
    gamma_cor,
    gamma_cor_exact,
    gamma_th,
    gamma_vac,
    ma_coherence,
    phase_shift,
    renorm_chi,
    renorm_gamma,
    renorm_gamma_cor,
)
from qdeph.model import c_factor

LAM = 1.0 / 3.0
OHMIC = SpectralDensity(coupling=LAM, omega_c=1.0, s=1.0)
# hot weakly-polarized and cold strongly-polarized reference states
HOT = QubitBathParams(omega0=1.0, beta=0.1, sigma3_mean=0.2, spectral=OHMIC)
COLD = QubitBathParams(omega0=1.0, beta=5.0, sigma3_mean=0.99, spectral=OHMIC)


def _params(beta_omega0, m, spectral=OHMIC):
    return QubitBathParams(omega0=1.0, beta=beta_omega0, sigma3_mean=m,
                           spectral=spectral)


# ---------------------------------------------------------------------------
# parameter validation and defaults


def test_params_validation():
    with pytest.raises(ValueError):
        _params(0.0, 0.2)
    with pytest.raises(ValueError):
        QubitBathParams(omega0=-1.0, beta=1.0, sigma3_mean=0.0,
                        spectral=OHMIC)
    with pytest.raises(ValueError):
        _params(1.0, 1.5)
    with pytest.raises(ValueError):
        # |y0|^2 must fit inside the Bloch ball: (1-m^2)/4 max
        QubitBathParams(omega0=1.0, beta=1.0, sigma3_mean=0.8,
                        spectral=OHMIC, initial_coherence=0.5 + 0.0j)


def test_default_initial_coherence_sits_on_bloch_sphere():
    p = _params(1.0, 0.6)
    assert p.initial_coherence == pytest.approx(
        math.sqrt((1.0 - 0.36) / 4.0), rel=1e-15)
    full = _params(1.0, 1.0)
    assert full.initial_coherence == 0.0


def test_explicit_initial_coherence_is_kept():
    p = QubitBathParams(omega0=1.0, beta=1.0, sigma3_mean=0.0,
                        spectral=OHMIC, initial_coherence=0.1 - 0.2j)
    assert p.initial_coherence == 0.1 - 0.2j


# ---------------------------------------------------------------------------
# initial-correlation prefactors


def test_a_init_reference_states():
    assert a_init(HOT) == pytest.approx(-0.15155592256342224, rel=1e-13)
    assert a_init(COLD) == pytest.approx(-0.14561003108833506, rel=1e-13)
    # matches the explicit tanh expression
    th = math.tanh(0.05)
    assert a_init(HOT) == pytest.approx((th - 0.2) / (1.0 - 0.2 * th),
                                        rel=1e-14)


def test_a_init_limits():
    # unpolarized qubit: bare thermal factor
    assert a_init(_params(2.0, 0.0)) == math.tanh(1.0)
    # infinite temperature: -m
    assert a_init(_params(1e-12, 0.4)) == pytest.approx(-0.4, abs=1e-12)
    # thermal polarization: no initial correlation at all
    assert a_init(_params(5.0, math.tanh(2.5))) == 0.0


def test_c_factor_reference_states():
    assert c_factor(HOT) == pytest.approx(0.9770308023359501, rel=1e-13)
    assert c_factor(_params(5.0, math.tanh(2.5))) == 1.0
    assert c_factor(_params(1.0, 1.0)) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(1e-3, 50.0),
    m=st.floats(-0.999, 0.999),
)
def test_prefactor_identities(x, m):
    """A^2 - 1 = -C, 0 <= C <= 1 and |A| < 1 for every thermal state."""
    p = QubitBathParams(omega0=1.0, beta=2.0 * x, sigma3_mean=m,
                        spectral=OHMIC)
    a = a_init(p)
    c = c_factor(p)
    # strict inequality mathematically; tanh saturation allows == at large x
    assert abs(a) <= 1.0
    assert -1e-15 <= c <= 1.0 + 1e-15
    assert a * a - 1.0 == pytest.approx(-c, abs=1e-12)


# ---------------------------------------------------------------------------
# phase and decoherence pieces


def test_phase_shift_reference_value():
    assert phase_shift(HOT, 1.0) == pytest.approx(-0.03967724774443924,
                                                  rel=1e-12)
    # A = 0 shuts the phase off identically
    assert phase_shift(_params(5.0, math.tanh(2.5)), 3.0) == 0.0
    assert phase_shift(HOT, 0.0) == 0.0


def test_correlational_decoherence_reference_values():
    assert gamma_cor(HOT, 1.0) == pytest.approx(0.03348231773171791,
                                                rel=1e-12)
    assert gamma_cor_exact(HOT, 1.0) == pytest.approx(0.03384435414766424,
                                                      rel=1e-12)
    assert gamma_cor(HOT, 0.0) == 0.0
    assert gamma_cor_exact(HOT, 0.0) == 0.0
    # fully polarized qubit carries no correlational decoherence
    p1 = _params(1.0, 1.0)
    assert gamma_cor(p1, 2.0) == 0.0
    assert gamma_cor_exact(p1, 2.0) == 0.0


def test_exact_correlational_form():
    got = exact_correlational_decoherence(0.5, 0.7)
    assert got == pytest.approx(-0.5 * math.log1p(-0.5 * math.sin(0.7) ** 2),
                                rel=1e-15)
    assert exact_correlational_decoherence(0.0, 1.0) == 0.0


def test_exact_correlational_domain_error():
    with pytest.raises(ValueError, match="undefined"):
        exact_correlational_decoherence(1.0, math.pi / 2.0)
    # reachable from a physical state: C = 1 and the phase integral
    # hitting pi/2 on the nose
    bad = QubitBathParams(
        omega0=1.0, beta=5.0, sigma3_mean=math.tanh(2.5),
        spectral=SpectralDensity(coupling=1.5, omega_c=1.0, s=1.0))
    with pytest.raises(ValueError):
        gamma_cor_exact(bad, math.sqrt(3.0))
    with pytest.raises(ValueError, match="t = "):
        breakdown_grid(bad, np.array([0.0, 1.0, math.sqrt(3.0), 2.0]))


def test_quartic_agreement_of_factorized_and_exact():
    """gamma_cor deviates from the exact exponent only at fourth order."""
    diffs = []
    for lam in (0.1, 0.05, 0.025):
        J = SpectralDensity(coupling=lam, omega_c=1.0, s=1.0)
        p = _params(0.1, 0.2, J)
        diffs.append(gamma_cor_exact(p, 1.0) - gamma_cor(p, 1.0))
    scaled = [d / lam**4 for d, lam in zip(diffs, (0.1, 0.05, 0.025))]
    assert max(scaled) / min(scaled) < 1.05


# ---------------------------------------------------------------------------
# renormalized exponents


def test_renorm_reference_values():
    # agree with 30-digit references to ~5e-10 (time-integral tolerance)
    assert renorm_chi(HOT, 2.0) == pytest.approx(0.19674398216382824,
                                                 rel=1e-9)
    assert renorm_gamma_cor(HOT, 2.0) == pytest.approx(0.06725161068201752,
                                                       rel=1e-9)
    assert renorm_chi(COLD, 2.0) == pytest.approx(-0.01421309442255416,
                                                  rel=1e-9)
    assert renorm_gamma_cor(COLD, 2.0) == pytest.approx(0.07006481115009716,
                                                        rel=1e-9)


def test_renorm_gamma_assembles_all_pieces():
    t = 2.0
    want = (gamma_vac(OHMIC, t) + gamma_th(OHMIC, HOT.beta, t)
            + renorm_gamma_cor(HOT, t))
    assert renorm_gamma(HOT, t) == pytest.approx(want, rel=1e-14)


def test_renorm_corrections_vanish_without_polarization():
    p = _params(0.7, 0.0)
    assert renorm_chi(p, 2.0) == phase_shift(p, 2.0)
    assert renorm_gamma_cor(p, 2.0) == gamma_cor(p, 2.0)
    assert renorm_chi(HOT, 0.0) == 0.0
    assert renorm_gamma_cor(HOT, 0.0) == 0.0


def test_renorm_correction_sign_follows_m_times_a():
    """The decoherence correction has the sign of -m*A."""
    for beta_omega0, m in ((0.1, 0.2), (5.0, 0.99), (0.1, -0.3),
                           (0.1, 0.02)):
        p = _params(beta_omega0, m)
        product = m * a_init(p)
        corr = renorm_gamma_cor(p, 2.0) - gamma_cor(p, 2.0)
        assert corr * product < 0.0


def test_renorm_chi_correction_scales_quadratically_in_coupling():
    corr = []
    for lam in (0.1, 0.05):
        J = SpectralDensity(coupling=lam, omega_c=1.0, s=1.0)
        p = _params(0.1, 0.2, J)
        corr.append(renorm_chi(p, 2.0) - phase_shift(p, 2.0))
    assert corr[0] / corr[1] == pytest.approx(4.0, abs=0.05)


# ---------------------------------------------------------------------------
# closed-form coherence branches


def test_ma_coherence_initial_point_and_free_qubit():
    assert ma_coherence(HOT, 0.0) == HOT.initial_coherence
    free = _params(0.5, 0.3, SpectralDensity(coupling=0.0, omega_c=1.0,
                                             s=1.0))
    for t in (0.0, 1.0, 7.5):
        assert ma_coherence(free, t) == free.initial_coherence


def test_ma_coherence_zn_modulus():
    t = 1.5
    y = ma_coherence(HOT, t, branch="zn")
    gamma = (gamma_vac(OHMIC, t) + gamma_th(OHMIC, HOT.beta, t)
             + gamma_cor(HOT, t))
    assert abs(y) == pytest.approx(abs(HOT.initial_coherence)
                                   * math.exp(-gamma), rel=1e-13)
    assert np.angle(y) == pytest.approx(phase_shift(HOT, t), rel=1e-12)


def test_ma_coherence_renormalized_branch():
    t = 2.0
    y = ma_coherence(HOT, t, branch="renormalized")
    assert abs(y) == pytest.approx(abs(HOT.initial_coherence)
                                   * math.exp(-renorm_gamma(HOT, t)),
                                   rel=1e-12)
    assert np.angle(y) == pytest.approx(renorm_chi(HOT, t), rel=1e-9)
    assert y != ma_coherence(HOT, t, branch="zn")


def test_ma_coherence_unknown_branch():
    with pytest.raises(ValueError):
        ma_coherence(HOT, 1.0, branch="markov")


def test_zn_modulus_never_grows():
    mods = [abs(ma_coherence(HOT, float(t), branch="zn"))
            for t in np.linspace(0.0, 20.0, 41)]
    assert all(b <= a + 1e-12 for a, b in zip(mods, mods[1:]))


# ---------------------------------------------------------------------------
# grid evaluation


def test_breakdown_grid_matches_scalar():
    t_grid = np.linspace(0.0, 3.0, 61)
    bds = breakdown_grid(HOT, t_grid)
    assert len(bds) == 61
    for k in (0, 3, 30, 60):
        sc = breakdown(HOT, float(t_grid[k]))
        gr = bds[k]
        assert gr.t == sc.t
        for field in ("chi", "gamma_vac", "gamma_th", "gamma_cor",
                      "gamma_cor_exact", "f_of_t"):
            assert getattr(gr, field) == pytest.approx(
                getattr(sc, field), rel=1e-9, abs=1e-12)
        # cumulative-Simpson corrections converge at h^4
        assert gr.chi_renorm == pytest.approx(sc.chi_renorm, abs=1e-7)
        assert gr.gamma_cor_renorm == pytest.approx(sc.gamma_cor_renorm,
                                                    abs=1e-8)


def test_breakdown_at_zero_time():
    b = breakdown(HOT, 0.0)
    for field in ("chi", "gamma_vac", "gamma_th", "gamma_cor",
                  "gamma_cor_exact", "chi_renorm", "gamma_cor_renorm",
                  "f_of_t"):
        assert getattr(b, field) == 0.0
    assert b.gamma_renorm == 0.0


def test_breakdown_grid_input_validation():
    with pytest.raises(ValueError):
        breakdown_grid(HOT, np.array([0.5, 1.0]))  # must start at 0
    with pytest.raises(ValueError):
        breakdown_grid(HOT, np.array([0.0, 2.0, 1.0]))  # must increase
    with pytest.raises(ValueError):
        breakdown_grid(HOT, np.zeros((2, 2)))


@settings(max_examples=40, deadline=None)
@given(
    x=st.floats(0.05, 10.0),
    m=st.floats(-0.95, 0.95),
    t=st.floats(0.0, 10.0),
)
def test_decoherence_pieces_nonnegative(x, m, t):
    p = QubitBathParams(omega0=1.0, beta=2.0 * x, sigma3_mean=m,
                        spectral=OHMIC)
    assert gamma_cor(p, t) >= 0.0
    assert gamma_cor_exact(p, t) >= 0.0
    assert abs(ma_coherence(p, t, branch="zn")) <= abs(p.initial_coherence)
