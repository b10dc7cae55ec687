import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from silvac import units
from silvac.hamiltonians import (
    FieldConfig,
    SpinSystem,
    build_lab_hamiltonian,
    build_odmr_hamiltonian,
    build_perturbation,
    build_rotating_frame_hamiltonian,
    build_state_hamiltonian,
    vsi_system,
)
from silvac.spin_algebra import ES, GS, MS, build_spin_operators, kron

# intra-block index layout: electron m descending, nuclear (a, b) fast
IDX = {(m, n): 2 * i + j for i, m in enumerate((1.5, 0.5, -0.5, -1.5)) for j, n in enumerate((0.5, -0.5))}

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


def test_vsi_defaults():
    s = vsi_system()
    assert (s.d_gs, s.d_es) == (1.25, 7.32)
    assert (s.g_par_1, s.g_par_2, s.g_par_3) == (2.0, 0.0, 0.0)
    assert (s.g_perp_1, s.g_perp_2, s.g_perp_3) == (2.0, 0.0, 0.2)
    np.testing.assert_allclose(s.hfc_gs, 0.001 * np.eye(3), atol=0)
    np.testing.assert_allclose(s.hfc_es, 0.001 * np.eye(3), atol=0)
    assert s.gamma_n_over_gamma_e == pytest.approx(-3.024e-4)
    assert s.theta == pytest.approx(math.radians(5.0))
    assert s.gamma_e == pytest.approx(units.GAMMA_E)
    assert s.gamma_n == pytest.approx(-3.024e-4 * units.GAMMA_E)


def test_spin_system_accessors_and_validation():
    s = vsi_system()
    assert s.zfs(GS) == 1.25 and s.zfs(ES) == 7.32
    with pytest.raises(ValueError):
        s.zfs(MS)
    with pytest.raises(ValueError):
        s.hfc(MS)
    with pytest.raises(ValueError):
        SpinSystem(d_gs=1.0, d_es=2.0, hfc_gs=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        SpinSystem(d_gs=1.0, d_es=2.0, hfc_gs=np.eye(3) * 1j)
    diag = SpinSystem(d_gs=1.0, d_es=2.0, hfc_gs=[0.2, 0.0, 0.2])
    np.testing.assert_allclose(diag.hfc_gs, np.diag([0.2, 0.0, 0.2]), atol=0)


@settings(max_examples=40, deadline=None)
@given(b=st.floats(min_value=0.0, max_value=30.0, allow_nan=False), theta=st.floats(min_value=0.0, max_value=0.3),
       g2=finite, g3=finite, gp2=finite, gp3=finite, axx=finite, ayy=finite, azz=finite)
def test_lab_hamiltonian_is_hermitian_and_block_diagonal(b, theta, g2, g3, gp2, gp3, axx, ayy, azz):
    s = SpinSystem(d_gs=1.25, d_es=7.32, g_par_2=g2, g_par_3=g3, g_perp_2=gp2, g_perp_3=gp3,
                   hfc_gs=[axx, ayy, azz], hfc_es=[azz, axx, ayy], theta=theta)
    h = build_lab_hamiltonian(s, b).full()
    np.testing.assert_allclose(h, h.conj().T, atol=1e-12)
    assert np.all(h[:8, 8:] == 0.0)
    assert np.all(h[8:16, 16:] == 0.0)


def test_unperturbed_spectrum_no_hyperfine():
    s = SpinSystem(d_gs=1.25, d_es=7.32, hfc_gs=0.0, hfc_es=0.0)
    b = 3.7
    for state, d in ((GS, 1.25), (ES, 7.32)):
        h = build_state_hamiltonian(s, state, b)
        expect = sorted(
            s.gamma_e * b * m - s.gamma_n * b * n + d * s.gamma_e * (m * m - 1.25)
            for m in (1.5, 0.5, -0.5, -1.5)
            for n in (0.5, -0.5)
        )
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), expect, atol=1e-12)


def test_isotropic_flip_flop_element():
    a_iso = 0.2
    s = SpinSystem(d_gs=1.25, d_es=7.32, hfc_gs=a_iso, hfc_es=a_iso)
    h = build_state_hamiltonian(s, GS, 2.3)
    # states (-3/2, a) and (-1/2, b) are coupled by (A/2)(S+I- + S-I+)
    el = h[IDX[(-1.5, 0.5)], IDX[(-0.5, -0.5)]]
    assert abs(el) / s.gamma_e == pytest.approx(math.sqrt(3.0) / 2.0 * a_iso, rel=1e-12)
    # total-spin-projection conserving: the double-flip pair stays uncoupled
    assert h[IDX[(-1.5, -0.5)], IDX[(-0.5, 0.5)]] == 0.0


def test_anisotropic_double_flip_element():
    axx, ayy = 0.2, 0.0
    s = SpinSystem(d_gs=1.25, d_es=7.32, hfc_gs=[axx, ayy, 0.2], hfc_es=[axx, ayy, 0.2])
    h = build_state_hamiltonian(s, GS, 2.7)
    el = h[IDX[(-1.5, -0.5)], IDX[(-0.5, 0.5)]]
    assert abs(el) / s.gamma_e == pytest.approx(math.sqrt(3.0) / 4.0 * (axx - ayy), rel=1e-12)


def test_perturbation_absent_terms_vanish():
    s = SpinSystem(d_gs=1.25, d_es=7.32, g_perp_1=0.0, g_perp_3=0.0, theta=0.1)
    assert np.all(build_perturbation(s, 10.0) == 0.0)
    aligned = SpinSystem(d_gs=1.25, d_es=7.32, g_perp_1=2.0, g_perp_3=0.2, theta=0.0)
    assert np.all(build_perturbation(aligned, 10.0) == 0.0)


def test_perturbation_transverse_g1_term():
    s = SpinSystem(d_gs=1.25, d_es=7.32, g_perp_1=2.0, g_perp_3=0.0, theta=0.05)
    b = 4.0
    v = build_perturbation(s, b)
    quartet = build_spin_operators(1.5)
    expect = kron(2.0 * units.MU_B * b * 0.05 * quartet.sx, np.eye(2))
    np.testing.assert_allclose(v, expect, atol=1e-15)


def test_perturbation_triple_quantum_term():
    g3 = 0.6
    s = SpinSystem(d_gs=1.25, d_es=7.32, g_par_3=g3, g_perp_1=0.0, g_perp_3=0.0, theta=0.0)
    b = 2.0
    v = build_perturbation(s, b)
    el = v[IDX[(1.5, 0.5)], IDX[(-1.5, 0.5)]]
    # <3/2|S+^3|-3/2> = 6, so the only coupling is (3/2) g3 mu_B B between the outer states
    assert abs(el) == pytest.approx(1.5 * g3 * units.MU_B * b, rel=1e-12)
    mask = np.zeros((8, 8), dtype=bool)
    for n in (0.5, -0.5):
        mask[IDX[(1.5, n)], IDX[(-1.5, n)]] = mask[IDX[(-1.5, n)], IDX[(1.5, n)]] = True
    assert np.all(v[~mask] == 0.0)


def test_double_quantum_misalignment_element():
    g_perp_3, theta, b = 0.2, math.radians(5.0), 7.0
    s = SpinSystem(d_gs=1.25, d_es=7.32, g_perp_1=0.0, g_perp_3=g_perp_3, theta=theta)
    v = build_perturbation(s, b)
    el = v[IDX[(0.5, 0.5)], IDX[(-1.5, 0.5)]]
    assert abs(el) == pytest.approx(math.sqrt(3.0) / 2.0 * g_perp_3 * units.MU_B * b * theta, rel=1e-12)
    # pure double-quantum: no single-quantum matrix elements
    assert v[IDX[(1.5, 0.5)], IDX[(0.5, 0.5)]] == 0.0


def test_rotating_frame_degeneracy_at_twice_zfs():
    s = SpinSystem(d_gs=1.25, d_es=7.32, hfc_gs=0.0, hfc_es=0.0)
    omega = 2.0 * 1.25 * s.gamma_e
    h = build_rotating_frame_hamiltonian(s, FieldConfig(b=0.0, omega_rf=omega), GS)
    # at drive frequency 2*D the +3/2 and +1/2 levels are degenerate in the frame
    assert h[IDX[(1.5, 0.5)], IDX[(1.5, 0.5)]] == pytest.approx(h[IDX[(0.5, 0.5)], IDX[(0.5, 0.5)]], abs=1e-12)


def test_rotating_frame_drive_term():
    s = vsi_system()
    base = FieldConfig(b=1.0, b1=0.0, omega_rf=0.3, rf_on=False)
    on = FieldConfig(b=1.0, b1=0.25, omega_rf=0.3, rf_on=True)
    armed_but_zero = FieldConfig(b=1.0, b1=0.0, omega_rf=0.3, rf_on=True)
    h0 = build_rotating_frame_hamiltonian(s, base, ES)
    h1 = build_rotating_frame_hamiltonian(s, on, ES)
    quartet = build_spin_operators(1.5)
    np.testing.assert_allclose(h1 - h0, kron(-s.gamma_e * 0.25 * quartet.sx, np.eye(2)), atol=1e-15)
    # rf flag with zero amplitude is exactly the reference problem
    np.testing.assert_array_equal(build_rotating_frame_hamiltonian(s, armed_but_zero, ES), h0)


def test_rotating_frame_keeps_secular_hyperfine_only():
    s = SpinSystem(d_gs=1.25, d_es=7.32, hfc_gs=[0.2, 0.1, 0.3], hfc_es=0.0)
    h = build_rotating_frame_hamiltonian(s, FieldConfig(b=2.0, omega_rf=0.1), GS)
    # nuclear-flip elements from Axx/Ayy must be averaged out in the frame
    assert h[IDX[(-1.5, 0.5)], IDX[(-0.5, -0.5)]] == 0.0
    # while the Sz*Iz (secular) part survives
    lab = build_state_hamiltonian(s, GS, 2.0)
    assert h[IDX[(1.5, 0.5)], IDX[(1.5, 0.5)]] != 0.0
    assert lab[IDX[(-1.5, 0.5)], IDX[(-0.5, -0.5)]] != 0.0


def test_odmr_hamiltonian_perturbation_toggle():
    s = vsi_system()
    cfg = FieldConfig(b=2.0, b1=0.1, omega_rf=0.2, rf_on=True)
    plain = build_odmr_hamiltonian(s, cfg)
    with_v = build_odmr_hamiltonian(s, cfg, with_perturbation=True)
    v = build_perturbation(s, 2.0)
    np.testing.assert_allclose(with_v.h_gs - plain.h_gs, v, atol=1e-15)
    np.testing.assert_allclose(with_v.h_es - plain.h_es, v, atol=1e-15)
    np.testing.assert_array_equal(with_v.h_ms, plain.h_ms)


def test_shelving_block_nuclear_zeeman():
    s = vsi_system()
    b = 5.0
    h = build_lab_hamiltonian(s, b)
    np.testing.assert_allclose(np.diag(h.h_ms), [-s.gamma_n * b * 0.5, s.gamma_n * b * 0.5], atol=1e-15)


def test_lab_hamiltonian_perturbation_toggle():
    s = vsi_system()
    bare = build_lab_hamiltonian(s, 6.0, with_perturbation=False)
    np.testing.assert_array_equal(bare.h_gs, build_state_hamiltonian(s, GS, 6.0))
    full = build_lab_hamiltonian(s, 6.0)
    np.testing.assert_allclose(full.h_gs - bare.h_gs, build_perturbation(s, 6.0), atol=1e-15)


def test_full_matrix_layout():
    s = vsi_system()
    bh = build_lab_hamiltonian(s, 1.0)
    full = bh.full()
    assert full.shape == (18, 18)
    np.testing.assert_array_equal(full[:8, :8], bh.h_gs)
    np.testing.assert_array_equal(full[8:16, 8:16], bh.h_es)
    np.testing.assert_array_equal(full[16:, 16:], bh.h_ms)
