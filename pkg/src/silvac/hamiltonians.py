"""Spin Hamiltonians of the optical cycle.

Both optically active blocks share the same structure: electron and nuclear
Zeeman terms, an axial zero-field splitting D(Sz^2 - 5/4) and a hyperfine
tensor coupling the quartet electron to the nucleus.  On top of that sit the
six symmetry-allowed Zeeman perturbation terms (three parallel, three
transverse families) that become active when the defect axis is tilted away
from the field, plus the rotating-frame form used for computing ODMR.

All returned matrices are in rad/ns.  Model parameters are stored in mT and
scaled by the electron gyromagnetic ratio gamma_e = g_par_1 * mu_B on entry.
The static field is taken along +Z; a small tilt theta of the defect axis
puts a transverse component B*theta along +X (first order in theta, with the
longitudinal component left at B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import units
from .spin_algebra import (
    DIM_MS,
    ES,
    GS,
    build_spin_operators,
    kron,
)

_QUARTET = build_spin_operators(1.5)
_NUCLEUS = build_spin_operators(0.5)
_I4 = np.eye(4, dtype=complex)
_I2 = np.eye(2, dtype=complex)

_S_VEC = (_QUARTET.sx, _QUARTET.sy, _QUARTET.sz)
_I_VEC = (_NUCLEUS.sx, _NUCLEUS.sy, _NUCLEUS.sz)

#: Sz^2 - 5/4, the axial ZFS form for S = 3/2.
_ZFS_FORM = _QUARTET.sz @ _QUARTET.sz - 1.25 * _I4


def _as_hfc_tensor(a) -> np.ndarray:
    """Accept a scalar (isotropic), length-3 diagonal, or full 3x3 hyperfine
    tensor, all in mT."""
    if not np.isrealobj(np.asarray(a)):
        raise ValueError("hyperfine tensor must be real")
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        arr = float(arr) * np.eye(3)
    elif arr.shape == (3,):
        arr = np.diag(arr)
    if arr.shape != (3, 3):
        raise ValueError(f"hyperfine tensor must be scalar, length-3 diagonal or 3x3, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """Static description of the defect center.

    Attributes:
        d_gs, d_es: axial ZFS parameters in mT (field-equivalent).
        g_par_1 .. g_perp_3: the six linearly independent g-factors allowed
            by the trigonal site symmetry.  g_par_1 defines gamma_e.
        hfc_gs, hfc_es: 3x3 hyperfine tensors in mT (scalar input is
            broadcast to an isotropic tensor).
        gamma_n_over_gamma_e: signed ratio gamma_n / gamma_e.
        theta: tilt angle (radians) between the defect Z-axis and the field.
            The small-angle form sin(theta) ~ theta is used throughout, so
            keep |theta| well below 1.
    """

    d_gs: float
    d_es: float
    g_par_1: float = 2.0
    g_par_2: float = 0.0
    g_par_3: float = 0.0
    g_perp_1: float = 2.0
    g_perp_2: float = 0.0
    g_perp_3: float = 0.0
    hfc_gs: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    hfc_es: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    gamma_n_over_gamma_e: float = units.GAMMA_RATIO_29SI
    theta: float = 0.0

    def __post_init__(self):
        for name in ("hfc_gs", "hfc_es"):
            arr = _as_hfc_tensor(getattr(self, name))
            if not np.isrealobj(arr):
                raise ValueError(f"{name} must be real")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def gamma_e(self) -> float:
        """Electron gyromagnetic ratio, rad ns^-1 mT^-1."""
        return units.gyromagnetic_ratio(self.g_par_1)

    @property
    def gamma_n(self) -> float:
        """Nuclear gyromagnetic ratio (signed), rad ns^-1 mT^-1."""
        return self.gamma_n_over_gamma_e * self.gamma_e

    def zfs(self, state: str) -> float:
        """ZFS parameter of a block in mT."""
        if state == GS:
            return self.d_gs
        if state == ES:
            return self.d_es
        raise ValueError(f"no ZFS for block {state!r}")

    def hfc(self, state: str) -> np.ndarray:
        """Hyperfine tensor of a block in mT."""
        if state == GS:
            return self.hfc_gs
        if state == ES:
            return self.hfc_es
        raise ValueError(f"no hyperfine tensor for block {state!r}")


def vsi_system(
    *,
    theta: float = math.radians(5.0),
    hfc_iso: float = 0.001,
    g_perp_3: float = 0.2,
) -> SpinSystem:
    """Literature defaults for the negatively charged silicon-vacancy (V2) center.

    D values, the g-factor set and the single-29Si hyperfine constant follow
    the values commonly used for modeling this defect; the keyword arguments
    expose the ones most often varied.
    """
    return SpinSystem(
        d_gs=1.25,
        d_es=7.32,
        g_par_1=2.0,
        g_par_2=0.0,
        g_par_3=0.0,
        g_perp_1=2.0,
        g_perp_2=0.0,
        g_perp_3=g_perp_3,
        hfc_gs=hfc_iso * np.eye(3),
        hfc_es=hfc_iso * np.eye(3),
        gamma_n_over_gamma_e=units.GAMMA_RATIO_29SI,
        theta=theta,
    )


@dataclass(frozen=True)
class FieldConfig:
    """Static and radiofrequency field settings.

    Attributes:
        b: static field magnitude in mT (>= 0).
        b1: circularly polarized RF amplitude in mT (>= 0).
        omega_rf: RF angular frequency in rad/ns.
        rf_on: whether the drive term is applied.
    """

    b: float
    b1: float = 0.0
    omega_rf: float = 0.0
    rf_on: bool = False

    def __post_init__(self):
        if self.b < 0 or self.b1 < 0:
            raise ValueError("field magnitudes must be nonnegative")


@dataclass(frozen=True)
class BlockHamiltonian:
    """Block-diagonal Hamiltonian of the three-manifold system, rad/ns.

    The shelving block carries at most the nuclear Zeeman term; coherences
    between blocks never appear, so the inter-block energy offsets are
    dropped.
    """

    h_gs: np.ndarray
    h_es: np.ndarray
    h_ms: np.ndarray

    def full(self) -> np.ndarray:
        """Assemble the 18x18 block-diagonal matrix."""
        out = np.zeros((18, 18), dtype=complex)
        out[0:8, 0:8] = self.h_gs
        out[8:16, 8:16] = self.h_es
        out[16:18, 16:18] = self.h_ms
        return out


def build_state_hamiltonian(system: SpinSystem, state: str, b: float) -> np.ndarray:
    """Unperturbed 8x8 Hamiltonian of one optical block at field b (mT).

    Contains the electron and nuclear Zeeman terms, the axial ZFS and the
    full hyperfine tensor:

        gamma_e B Sz - gamma_n B Iz + D (Sz^2 - 5/4) + S.A.I
    """
    ge = system.gamma_e
    gn = system.gamma_n
    d = units.mt_to_rad_per_ns(system.zfs(state), ge)
    a = system.hfc(state) * ge
    h = ge * b * kron(_QUARTET.sz, _I2)
    h = h - gn * b * kron(_I4, _NUCLEUS.sz)
    h = h + d * kron(_ZFS_FORM, _I2)
    for u in range(3):
        for v in range(3):
            if a[u, v] != 0.0:
                h = h + a[u, v] * kron(_S_VEC[u], _I_VEC[v])
    return h


def build_perturbation(system: SpinSystem, b: float) -> np.ndarray:
    """Sum of the five Zeeman perturbation terms at field b (mT), 8x8.

    The transverse families pick up the tilt-induced component B*theta along
    +X; the parallel families couple to the longitudinal component, which is
    approximated by B itself (the cos(theta) correction is second order).
    Terms with zero g-factor drop out.  The result acts as the identity on
    the nuclear factor and is shared by both optical blocks.
    """
    theta = system.theta
    b_perp = b * theta
    mu = units.MU_B
    sp, sm, sz, sx = _QUARTET.s_plus, _QUARTET.s_minus, _QUARTET.sz, _QUARTET.sx
    v = np.zeros((4, 4), dtype=complex)
    if system.g_par_2 != 0.0:
        v = v + system.g_par_2 * mu * b * (sz @ _ZFS_FORM)
    if system.g_par_3 != 0.0:
        sp3 = sp @ sp @ sp
        v = v + system.g_par_3 * mu * b * (sp3 - sp3.conj().T) / 4.0j
    if b_perp != 0.0:
        if system.g_perp_1 != 0.0:
            v = v + system.g_perp_1 * mu * b_perp * sx
        if system.g_perp_2 != 0.0:
            quad = sz @ sz - 0.75 * _I4
            v = v + system.g_perp_2 * mu * b_perp * (sx @ quad + quad @ sx)
        if system.g_perp_3 != 0.0:
            dq = sp @ sp - sm @ sm
            v = v + (-0.25j) * system.g_perp_3 * mu * b_perp * (dq @ sz + sz @ dq)
    return kron(v, _I2)


def build_rotating_frame_hamiltonian(system: SpinSystem, field: FieldConfig, state: str) -> np.ndarray:
    """8x8 Hamiltonian of one optical block in the frame of the RF drive.

    The frame rotation is applied to the electron spin only: the electron
    Zeeman term is shifted by -omega_rf*Sz, the circular drive becomes the
    static term -gamma_e*B1*Sx, and of the hyperfine tensor only the secular
    row (the terms multiplying Sz) survives the rotating-wave averaging.
    The nuclear Zeeman term is untouched.
    """
    ge = system.gamma_e
    gn = system.gamma_n
    d = units.mt_to_rad_per_ns(system.zfs(state), ge)
    a = system.hfc(state) * ge
    h = (ge * field.b - field.omega_rf) * kron(_QUARTET.sz, _I2)
    if field.rf_on and field.b1 != 0.0:
        h = h - ge * field.b1 * kron(_QUARTET.sx, _I2)
    h = h - gn * field.b * kron(_I4, _NUCLEUS.sz)
    h = h + d * kron(_ZFS_FORM, _I2)
    for v in range(3):
        if a[2, v] != 0.0:
            h = h + a[2, v] * kron(_QUARTET.sz, _I_VEC[v])
    return h


def _ms_hamiltonian(system: SpinSystem, b: float) -> np.ndarray:
    # nuclear Zeeman only; the shelving manifold has no electron-spin dynamics
    return -system.gamma_n * b * _NUCLEUS.sz.copy()


def build_lab_hamiltonian(system: SpinSystem, b: float, *, with_perturbation: bool = True) -> BlockHamiltonian:
    """Lab-frame BlockHamiltonian at field b (mT).

    The Zeeman perturbation terms are included by default; they are what
    turns the level crossings of a tilted defect into avoided crossings.
    """
    v = build_perturbation(system, b) if with_perturbation else 0.0
    return BlockHamiltonian(
        h_gs=build_state_hamiltonian(system, GS, b) + v,
        h_es=build_state_hamiltonian(system, ES, b) + v,
        h_ms=_ms_hamiltonian(system, b),
    )


def build_odmr_hamiltonian(system: SpinSystem, field: FieldConfig, *, with_perturbation: bool = False) -> BlockHamiltonian:
    """Rotating-frame BlockHamiltonian for ODMR steady states.

    By default the misalignment perturbation is left out (the rotating-frame
    treatment is formulated for a perfectly aligned defect); passing
    with_perturbation=True adds the static lab-frame perturbation matrix
    unchanged, which is a documented approximation, not a frame transform.
    """
    v = build_perturbation(system, field.b) if with_perturbation else 0.0
    return BlockHamiltonian(
        h_gs=build_rotating_frame_hamiltonian(system, field, GS) + v,
        h_es=build_rotating_frame_hamiltonian(system, field, ES) + v,
        h_ms=_ms_hamiltonian(system, field.b),
    )
