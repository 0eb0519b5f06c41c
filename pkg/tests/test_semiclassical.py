import math
from dataclasses import replace

import numpy as np
import pytest

from photon_transistor.cavity import CavityParams, shifted_frequency, transmission_coeff
from photon_transistor.semiclassical import (
    SaturableCavityModel,
    SemiclassicalSettings,
    _response,
    build_model,
    gain_sweep,
    steady_state_photons,
    transmitted_photons,
)

CAVITY_II = CavityParams(9000.0, 0.13, 0.13, 0.04, -0.947, -1.759)


def model(drive=1.0, **kw):
    fields = dict(
        base=CAVITY_II,
        n_crit_g=1.0e4,
        n_crit_e=2.0e5,
        n_crit_f=4.0e4,
        drive_amplitude=drive,
        bare_offset=5.0,
        signal_window_us=10.0,
        photon_flux_conversion=11.0,
    )
    fields.update(kw)
    return SaturableCavityModel(**fields)


def linear_root(m, f, level):
    """Closed-form root of the unsaturated (n_crit -> inf) flux balance."""
    delta = f - shifted_frequency(m.base, level)
    rhs = m.base.kappa_ext_in * m.drive_amplitude**2
    return rhs / ((m.base.kappa_tot / 2) ** 2 + delta**2)


def brute_force_root_count(m, f, level, n_pts=200_000):
    """Independent dense-grid oracle: count sign changes of the flux balance."""
    rhs = m.base.kappa_ext_in * m.drive_amplitude**2
    n_max = 1.05 * rhs / (m.base.kappa_tot / 2) ** 2
    grid = np.concatenate([[0.0], np.geomspace(n_max * 1e-15, n_max, n_pts)])
    vals = _response(m, grid, f - m.f_bare, level) - rhs
    return int(np.sum(vals[:-1] * vals[1:] < 0))


class TestSteadyState:
    def test_linear_limit_single_root(self):
        m = model(drive=3.0, n_crit_g=1e30, n_crit_e=1e30, n_crit_f=1e30)
        f = shifted_frequency(CAVITY_II, "g")
        roots = steady_state_photons(m, f, "g")
        assert len(roots) == 1 and roots[0].stable
        assert roots[0].n == pytest.approx(linear_root(m, f, "g"), rel=1e-9)

    def test_level_independent_when_chi_zero(self):
        base = replace(CAVITY_II, chi_ge=0.0, chi_gf=0.0)
        m = model(drive=5.0, base=base, bare_offset=0.0)
        f = base.f0 + 0.3
        roots = {lev: steady_state_photons(m, f, lev)[0].n for lev in ("g", "e", "f")}
        assert roots["g"] == pytest.approx(roots["e"], rel=1e-12)
        assert roots["g"] == pytest.approx(roots["f"], rel=1e-12)

    def test_bistable_window_three_roots_two_stable(self):
        # e-branch driven at the bare frequency inside its fold window
        rhs = 1.0e6
        m = model(drive=math.sqrt(rhs / 0.13))
        roots = steady_state_photons(m, m.f_bare, "e")
        assert len(roots) == 3
        assert sum(r.stable for r in roots) == 2
        assert not roots[1].stable  # middle branch unstable
        assert brute_force_root_count(m, m.f_bare, "e") == 3

    def test_root_count_always_odd(self):
        m0 = model()
        for rhs in np.geomspace(1e2, 1e7, 18):
            m = replace(m0, drive_amplitude=math.sqrt(rhs / 0.13))
            for level in ("g", "e"):
                n_roots = len(steady_state_photons(m, m0.f_bare, level))
                assert n_roots in (1, 3)

    def test_zero_drive(self):
        roots = steady_state_photons(model(drive=0.0), 9000.0, "g")
        assert roots == [(0.0, True)]


class TestTransmittedPhotons:
    def test_weak_drive_matches_closed_form(self):
        m = model(drive=0.05)
        for level in ("g", "e", "f"):
            f = shifted_frequency(CAVITY_II, level)
            t2 = abs(transmission_coeff(CAVITY_II, f, level)) ** 2
            flux_in = m.drive_amplitude**2
            expected = t2 * flux_in * m.signal_window_us
            got = transmitted_photons(m, f, level, "dim")
            assert got == pytest.approx(expected, rel=1e-6)

    def test_linear_limit_matches_closed_form_any_drive(self):
        m = model(drive=40.0, n_crit_g=1e30, n_crit_e=1e30, n_crit_f=1e30)
        f = shifted_frequency(CAVITY_II, "e") + 0.4
        t2 = abs(transmission_coeff(CAVITY_II, f, "e")) ** 2
        expected = t2 * m.drive_amplitude**2 * m.signal_window_us
        assert transmitted_photons(m, f, "e", "dim") == pytest.approx(expected, rel=1e-6)

    def test_bright_branch_state_independent_at_strong_drive(self):
        rhs = 1.0e9
        m = model(drive=math.sqrt(rhs / 0.13))
        bright = {
            lev: transmitted_photons(m, m.f_bare, lev, "bright") for lev in ("g", "e")
        }
        assert bright["g"] == pytest.approx(bright["e"], rel=0.01)

    def test_bright_branch_difference_shrinks_monotonically(self):
        # beyond the last fold the g/e contrast decays toward zero with drive
        m0 = model()
        diffs = []
        for rhs in np.geomspace(1e7, 1e10, 10):
            m = replace(m0, drive_amplitude=math.sqrt(rhs / 0.13))
            g = transmitted_photons(m, m0.f_bare, "g", "bright")
            e = transmitted_photons(m, m0.f_bare, "e", "bright")
            diffs.append(abs(g - e) / g)
        assert all(b < a for a, b in zip(diffs, diffs[1:]))
        assert diffs[-1] < 1e-3

    def test_branch_rules_bracket_bistable_window(self):
        rhs = 1.0e6
        m = model(drive=math.sqrt(rhs / 0.13))
        dim = transmitted_photons(m, m.f_bare, "e", "dim")
        bright = transmitted_photons(m, m.f_bare, "e", "bright")
        assert bright > 10 * dim

    def test_continuity_along_dim_branch(self):
        # normalized transmission drifts smoothly with drive; no branch jumps
        m0 = model()
        f = shifted_frequency(CAVITY_II, "e")
        prev = None
        for rhs in np.geomspace(10.0, 1e4, 120):
            m = replace(m0, drive_amplitude=math.sqrt(rhs / 0.13))
            val = transmitted_photons(m, f, "e", "dim") / rhs
            if prev is not None:
                assert abs(val - prev) < 0.05 * abs(prev) + 1e-9
            prev = val


@pytest.fixture(scope="module")
def sweep():
    grid = np.geomspace(3.0, 1e8, 48)
    return gain_sweep(model(), 0.80, 0.925, grid, "ge")


class TestGainSweep:
    def test_linear_regime_slope_one(self, sweep):
        pts = [(math.log10(p.n_s), p.gain_db / 10.0) for p in sweep if p.n_s < 100]
        assert len(pts) >= 5
        xs, ys = zip(*pts)
        slope = np.polyfit(xs, ys, 1)[0]
        assert slope == pytest.approx(1.0, abs=0.05)

    def test_all_three_regimes_present(self, sweep):
        regimes = {p.regime for p in sweep}
        assert regimes == {"linear", "blockade", "bright"}

    def test_blockade_extinction_dips_below_linear(self, sweep):
        r_linear = min(p.extinction_db for p in sweep if p.regime == "linear")
        r_blockade = min(p.extinction_db for p in sweep if p.regime == "blockade")
        assert r_blockade < r_linear - 0.5

    def test_bright_peak_exceeds_plateau_then_collapses(self, sweep):
        plateau = max(p.gain_db for p in sweep if p.regime == "blockade")
        bright = [p for p in sweep if p.regime == "bright"]
        peak = max(p.gain_db for p in bright)
        assert peak > plateau + 20.0
        assert bright[-1].gain_db < peak - 10.0

    def test_gf_subspace_also_sweeps(self):
        grid = np.geomspace(3.0, 1e8, 24)
        pts = gain_sweep(model(), 0.80, 0.925, grid, "gf")
        assert len(pts) == 24
        assert {p.regime for p in pts} >= {"linear", "bright"}

    def test_grid_must_ascend(self):
        with pytest.raises(ValueError):
            gain_sweep(model(), 0.8, 0.9, [10.0, 5.0], "ge")


def test_build_model_from_settings():
    settings = SemiclassicalSettings()
    m = build_model(CAVITY_II, settings, drive_amplitude=2.0)
    assert m.base == CAVITY_II
    assert m.n_crit_e == settings.n_crit_e
    assert m.drive_amplitude == 2.0


def test_settings_validation():
    with pytest.raises(ValueError):
        SemiclassicalSettings(n_crit_g=0.0)
    with pytest.raises(ValueError):
        SaturableCavityModel(CAVITY_II, 1.0, 1.0, 1.0, drive_amplitude=-1.0)
