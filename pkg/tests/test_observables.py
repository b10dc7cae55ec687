import math

import numpy as np
import pytest

from silvac.hamiltonians import FieldConfig, build_lab_hamiltonian, vsi_system
from silvac.kinetics import RateScheme, assemble_liouvillian, build_jump_operators, vsi_rates
from silvac.observables import (
    NUCLEAR_LEAK_RATE,
    SweepResult,
    SweepSpec,
    odmr_field_sweep,
    odmr_frequency_sweep,
    pl_derivative_sweep,
    pl_field_sweep,
    pl_intensity,
    relative_odmr,
    sweep_with_overrides,
)
from silvac.steady_state import BlockDensityMatrix, solve_steady_state

from conftest import with_nuclear_leak


def field_spec(start, stop, points, **kw):
    return SweepSpec(variable="field_mT", start=start, stop=stop, points=points, **kw)


class TestSweepSpec:
    def test_grid(self):
        np.testing.assert_allclose(field_spec(0.0, 20.0, 5).grid(), [0, 5, 10, 15, 20])

    @pytest.mark.parametrize("kw", [
        dict(variable="temperature_K", start=0.0, stop=1.0, points=5),
        dict(variable="field_mT", start=1.0, stop=1.0, points=5),
        dict(variable="field_mT", start=2.0, stop=1.0, points=5),
        dict(variable="field_mT", start=0.0, stop=1.0, points=1),
        dict(variable="field_mT", start=0.0, stop=1.0, points=5, derivative_step=0.0),
        dict(variable="field_mT", start=0.0, stop=1.0, points=5, normalization="zscore"),
    ])
    def test_rejects_bad_specs(self, kw):
        with pytest.raises(ValueError):
            SweepSpec(**kw)

    def test_overrides_revalidate(self):
        spec = field_spec(0.0, 1.0, 5)
        assert sweep_with_overrides(spec, points=7).points == 7
        with pytest.raises(ValueError):
            sweep_with_overrides(spec, points=0)


class TestSweepResult:
    def test_rejects_non_finite_values(self):
        with pytest.raises(ValueError):
            SweepResult(abscissa=np.array([0.0, 1.0]), values=np.array([0.0, np.nan]),
                        raw=np.array([0.0, 1.0]), spec=field_spec(0.0, 1.0, 2))

    def test_rejects_unsorted_abscissa(self):
        with pytest.raises(ValueError):
            SweepResult(abscissa=np.array([1.0, 0.0]), values=np.zeros(2),
                        raw=np.zeros(2), spec=field_spec(0.0, 1.0, 2))

    def test_nearest_annotation_none_without_landmarks(self):
        r = SweepResult(abscissa=np.array([0.0, 1.0]), values=np.zeros(2),
                        raw=np.zeros(2), spec=field_spec(0.0, 1.0, 2))
        assert r.nearest_annotation(0.5) is None


class TestPlIntensity:
    def test_empty_state_is_dark(self, table_rates):
        rho = BlockDensityMatrix(matrix=np.zeros((18, 18)))
        assert pl_intensity(rho, table_rates) == 0.0

    def test_maximally_mixed_state(self, table_rates):
        # four weak emitters at k1_fl and four strong ones at k2_fl,
        # each carrying population 1/18 per nuclear projection
        rho = BlockDensityMatrix(matrix=np.eye(18) / 18)
        expected = (4 * table_rates.k1_fl + 4 * table_rates.k2_fl) / 18
        assert pl_intensity(rho, table_rates) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.6 / 18)


class TestPlFieldSweep:
    def test_variable_guard(self, default_system, table_rates):
        spec = SweepSpec(variable="rf_frequency_MHz", start=10.0, stop=20.0, points=2)
        with pytest.raises(ValueError):
            pl_field_sweep(default_system, table_rates, spec)

    def test_zero_field_value_is_stable(self, default_system, table_rates):
        spec = field_spec(0.0, 0.5, 2)
        r = pl_field_sweep(default_system, table_rates, spec)
        assert r.values[0] == pytest.approx(1.388895921286688e-03, rel=1e-12)
        again = pl_field_sweep(default_system, table_rates, spec)
        np.testing.assert_array_equal(r.values, again.values)

    def test_decoupled_hyperfine_needs_leak_and_hits_closed_form(self, table_rates):
        system = vsi_system(hfc_iso=0.0)
        jumps = with_nuclear_leak(build_jump_operators(table_rates))
        r = pl_field_sweep(system, table_rates, field_spec(0.0, 0.5, 2), jumps=jumps)
        # at zero field the cycle populates all levels evenly enough that the
        # emission collapses to a closed-form rational number
        assert r.values[0] == pytest.approx(1.0 / 720.0, rel=1e-12)

    def test_threads_do_not_change_values(self, default_system, table_rates):
        spec = field_spec(1.0, 3.0, 6)
        serial = pl_field_sweep(default_system, table_rates, spec, threads=1)
        pooled = pl_field_sweep(default_system, table_rates, spec, threads=3)
        np.testing.assert_array_equal(serial.values, pooled.values)

    def test_diagnostics_track_solve_quality(self, default_system, table_rates):
        r = pl_field_sweep(default_system, table_rates, field_spec(1.0, 3.0, 4))
        assert r.diagnostics["residual_max"] < 1e-10
        assert r.diagnostics["min_eigenvalue"] > -1e-8
        assert r.diagnostics["asymmetry_max"] < 1e-10

    def test_equal_rate_control_is_flat(self, default_system):
        # equalizing both branching contrasts removes every spin signature
        rates = RateScheme(pump_i=0.01, k1_fl=0.075, k2_fl=0.075,
                           k1_isc=0.105, k2_isc=0.105, kprime_isc=0.01)
        r = pl_field_sweep(default_system, rates, field_spec(0.0, 20.0, 5))
        assert np.ptp(r.values) < 1e-10

    def test_annotations_mark_level_crossings(self, default_system, table_rates):
        r = pl_field_sweep(default_system, table_rates, field_spec(0.0, 0.5, 2))
        blocks = {a.name.split(":")[0] for a in r.annotations}
        assert blocks == {"gs", "es"}
        name, offset = r.nearest_annotation(2.4)
        assert name == "gs:lc-1b"
        assert offset == pytest.approx(-0.0995, abs=1e-3)
        # landmark clusters sit at the four crossing fields
        positions = np.array([a.position for a in r.annotations])
        for anchor in (1.25, 2.50, 7.32, 14.64):
            assert np.min(np.abs(positions - anchor)) < 5e-3


class TestPlDerivativeSweep:
    def test_matches_manual_central_difference(self, default_system, table_rates):
        b, step = 2.3, 0.02
        spec = field_spec(b, b + 0.7, 2, derivative_step=step)
        deriv = pl_derivative_sweep(default_system, table_rates, spec).values[0]
        flank = pl_field_sweep(default_system, table_rates, field_spec(b - step, b + step, 2))
        manual = (flank.values[1] - flank.values[0]) / (2 * step)
        assert deriv == pytest.approx(manual, rel=1e-12)

    def test_value_pin_and_step_insensitivity(self, default_system, table_rates):
        coarse = pl_derivative_sweep(default_system, table_rates,
                                     field_spec(2.3, 3.0, 2, derivative_step=0.02)).values[0]
        fine = pl_derivative_sweep(default_system, table_rates,
                                   field_spec(2.3, 3.0, 2, derivative_step=0.01)).values[0]
        assert coarse == pytest.approx(8.1283878707e-04, rel=1e-8)
        assert abs(fine - coarse) / abs(fine) < 1e-3  # discretization is converged

    def test_far_field_tail_is_quiet(self, default_system, table_rates):
        tail = pl_derivative_sweep(default_system, table_rates, field_spec(25.0, 26.0, 2)).values[0]
        assert abs(tail) < 1e-4


class TestNormalization:
    def test_max_abs_rescales_to_unit_peak(self, default_system, table_rates):
        spec = field_spec(1.0, 3.0, 6, normalization="max_abs")
        r = pl_derivative_sweep(default_system, table_rates, spec)
        assert np.max(np.abs(r.values)) == pytest.approx(1.0)
        np.testing.assert_allclose(r.values * np.max(np.abs(r.raw)), r.raw, atol=1e-15)

    def test_per_transition_rescales_each_window(self, default_system, table_rates):
        windows = ((1.0, 1.6), (2.2, 2.8))
        spec = field_spec(1.0, 2.8, 10, normalization="per_transition",
                          normalization_windows=windows)
        r = pl_derivative_sweep(default_system, table_rates, spec)
        for lo, hi in windows:
            m = (r.abscissa >= lo) & (r.abscissa <= hi)
            assert np.max(np.abs(r.values[m])) == pytest.approx(1.0)
        outside = ~((r.abscissa >= 1.0) & (r.abscissa <= 1.6)) & ~(
            (r.abscissa >= 2.2) & (r.abscissa <= 2.8))
        np.testing.assert_array_equal(r.values[outside], r.raw[outside])


class TestOdmr:
    def test_drive_amplitude_guard(self, default_system, table_rates):
        spec = SweepSpec(variable="rf_frequency_MHz", start=10.0, stop=20.0, points=2)
        with pytest.raises(ValueError):
            odmr_frequency_sweep(default_system, table_rates, spec)

    def test_variable_guards(self, default_system, table_rates):
        drive = FieldConfig(b=0.0, b1=0.1)
        with pytest.raises(ValueError):
            odmr_frequency_sweep(default_system, table_rates,
                                 field_spec(0.0, 1.0, 2, fixed=drive))
        with pytest.raises(ValueError):
            odmr_field_sweep(default_system, table_rates,
                             SweepSpec(variable="rf_frequency_MHz", start=1.0, stop=2.0,
                                       points=2, fixed=drive))

    def test_zero_field_line_sits_at_ground_state_splitting(self, default_system, table_rates):
        # 2 D_gs = 2.5 mT of Zeeman-equivalent splitting ~ 70 MHz
        spec = SweepSpec(variable="rf_frequency_MHz", start=30.0, stop=110.0, points=9,
                         fixed=FieldConfig(b=0.0, b1=0.1))
        r = odmr_frequency_sweep(default_system, table_rates, spec)
        assert int(np.argmax(np.abs(r.values))) == 4  # 70 MHz
        assert np.abs(r.values[4]) > 5 * np.abs(r.values[0])
        assert np.abs(r.values[4]) > 5 * np.abs(r.values[-1])

    def test_off_resonant_drive_has_negligible_contrast(self, default_system, table_rates):
        spec = SweepSpec(variable="rf_frequency_MHz", start=150.0, stop=160.0, points=2,
                         fixed=FieldConfig(b=0.0, b1=0.1))
        r = odmr_frequency_sweep(default_system, table_rates, spec)
        on_res = odmr_frequency_sweep(default_system, table_rates,
                                      sweep_with_overrides(spec, start=69.0, stop=71.0))
        assert np.max(np.abs(r.values)) < 0.05 * np.max(np.abs(on_res.values))

    def test_field_sweep_smoke(self, default_system, table_rates):
        spec = field_spec(4.0, 5.0, 3, fixed=FieldConfig(b=0.0, b1=0.3, omega_rf=0.0126))
        r = odmr_field_sweep(default_system, table_rates, spec)
        assert np.all(np.isfinite(r.values))
        assert r.diagnostics["residual_max"] < 1e-10


class TestRelativeOdmr:
    def test_population_difference_pins(self, default_system, table_rates, default_jumps):
        rho = solve_steady_state(assemble_liouvillian(
            build_lab_hamiltonian(default_system, 2.3), default_jumps))
        sig = relative_odmr(rho)
        assert sig.s1 == pytest.approx(-1.74732966e-02, rel=1e-6)
        assert sig.s2 == pytest.approx(-2.59223760e-01, rel=1e-6)
        assert sig.ratio == pytest.approx(sig.s1 / sig.s2, rel=1e-12)
        assert not sig.degenerate

    def test_degenerate_flag(self):
        sig = relative_odmr(BlockDensityMatrix(matrix=np.eye(18) / 18))
        assert sig.degenerate
        assert math.isnan(sig.ratio)
        assert sig.s1 == sig.s2 == 0.0


def test_leak_rate_is_tiny_relative_to_kinetics():
    assert NUCLEAR_LEAK_RATE == pytest.approx(1e-8)
    slowest = min(vsi_rates().__dict__.values())
    assert NUCLEAR_LEAK_RATE < 1e-5 * slowest
