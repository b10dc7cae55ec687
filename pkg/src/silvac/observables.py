"""Steady-state observables: photoluminescence and ODMR sweeps.

Every sweep point is an independent steady-state solve, so sweeps are
embarrassingly parallel; a thread pool is used (LAPACK releases the GIL)
and results are written by point index, which keeps output independent of
scheduling order.

PL is the rate-weighted population of the radiating manifold,

    I_PL = k1_fl * Tr(P_es,1/2 rho) + k2_fl * Tr(P_es,3/2 rho),

with the two projectors distinguishing the weakly and strongly radiative
excited-state doublets.  ODMR contrast at a sweep point is the PL with the
drive on minus the PL with the drive off, both in the same rotating frame.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import units
from .hamiltonians import (
    FieldConfig,
    SpinSystem,
    build_lab_hamiltonian,
    build_odmr_hamiltonian,
)
from .kinetics import (
    JumpOperatorSet,
    RateScheme,
    assemble_liouvillian,
    build_jump_operators,
    dissipator_superoperator,
)
from .lc_atlas import build_catalog
from .spin_algebra import ES, GS, PLUS_MINUS_HALF, PLUS_MINUS_THREE_HALF, projector
from .steady_state import BlockDensityMatrix, SingularSystem, solve_steady_state

FIELD_VARIABLE = "field_mT"
FREQUENCY_VARIABLE = "rf_frequency_MHz"

NORMALIZATIONS = ("none", "max_abs", "per_transition")

_P_ES_HALF = projector(ES, PLUS_MINUS_HALF)
_P_ES_THREE_HALF = projector(ES, PLUS_MINUS_THREE_HALF)

#: Symmetric nuclear depolarization rate (1/ns) added to the rotating-frame
#: ODMR solves.  The rotating frame keeps only the Sz-row of the hyperfine
#: tensor, so with a near-diagonal tensor the nuclear polarization is an
#: exact conserved quantity and the steady state is not unique; an equal
#: up/down flip rate selects the physical unpolarized-nucleus mixture while
#: biasing populations only at O(rate / slowest cycle rate) ~ 1e-6.
NUCLEAR_LEAK_RATE = 1e-8


def _nuclear_leak_jumps() -> JumpOperatorSet:
    amp = math.sqrt(NUCLEAR_LEAK_RATE)
    up = amp * np.kron(np.eye(9), np.array([[0.0, 1.0], [0.0, 0.0]]))
    down = amp * np.kron(np.eye(9), np.array([[0.0, 0.0], [1.0, 0.0]]))
    return JumpOperatorSet(operators=(up, down), labels=("nuclear_leak_up", "nuclear_leak_down"))


def pl_intensity(rho: BlockDensityMatrix, rates: RateScheme) -> float:
    """Steady-state photoluminescence rate (photons/ns) of one density matrix."""
    m = rho.matrix
    weak = np.trace(_P_ES_HALF @ m).real
    strong = np.trace(_P_ES_THREE_HALF @ m).real
    return rates.k1_fl * weak + rates.k2_fl * strong


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and how.

    variable selects the abscissa ("field_mT" or "rf_frequency_MHz"); fixed
    carries the non-swept drive settings (its matching entry is ignored).
    derivative_step is the central-difference half-step for derivative
    sweeps, in the abscissa unit.  normalization_windows (abscissa units)
    are only used by the "per_transition" mode, which rescales each window
    by its own extremum.
    """

    variable: str
    start: float
    stop: float
    points: int
    fixed: FieldConfig = field(default_factory=lambda: FieldConfig(b=0.0))
    derivative_step: float = 0.02
    normalization: str = "none"
    normalization_windows: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.variable not in (FIELD_VARIABLE, FREQUENCY_VARIABLE):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")
        if self.points < 2:
            raise ValueError("a sweep needs at least two points")
        if not self.derivative_step > 0.0:
            raise ValueError("derivative_step must be positive")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class LcAnnotation:
    """An analytic landmark position on the sweep axis."""

    name: str
    position: float


@dataclass(frozen=True)
class SweepResult:
    """Sweep output: abscissa, normalized values, raw values and context."""

    abscissa: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    spec: SweepSpec
    annotations: tuple[LcAnnotation, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sweep produced non-finite values")
        if not np.all(np.diff(self.abscissa) > 0):
            raise ValueError("abscissa must be strictly increasing")

    def nearest_annotation(self, x: float) -> tuple[str, float] | None:
        """Name and signed offset (x - position) of the closest landmark."""
        if not self.annotations:
            return None
        best = min(self.annotations, key=lambda a: abs(x - a.position))
        return best.name, x - best.position


def _normalize(raw: np.ndarray, spec: SweepSpec, abscissa: np.ndarray) -> np.ndarray:
    if spec.normalization == "none":
        return raw.copy()
    if spec.normalization == "max_abs":
        peak = np.max(np.abs(raw))
        return raw / peak if peak > 0 else raw.copy()
    values = raw.copy()
    for lo, hi in spec.normalization_windows:
        mask = (abscissa >= lo) & (abscissa <= hi)
        if not np.any(mask):
            continue
        peak = np.max(np.abs(raw[mask]))
        if peak > 0:
            values[mask] = raw[mask] / peak
    return values


def _run_points(worker, n: int, threads: int) -> list:
    """Evaluate worker(i) for i in range(n), results ordered by index."""
    if threads <= 1:
        return [worker(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n)))


def _solve(l_matrix) -> tuple[BlockDensityMatrix, float]:
    rho = solve_steady_state(l_matrix)
    x = np.asarray(rho.matrix, order="F").reshape(-1, order="F")
    residual = float(np.max(np.abs(l_matrix.matrix @ x)))
    return rho, residual


class _Diagnostics:
    """Worst-case solve quality across a sweep (thread-safe via GIL on floats)."""

    def __init__(self) -> None:
        self.residual_max = 0.0
        self.asymmetry_max = 0.0
        self.min_eigenvalue = math.inf

    def record(self, rho: BlockDensityMatrix, residual: float) -> None:
        self.residual_max = max(self.residual_max, residual)
        self.asymmetry_max = max(self.asymmetry_max, rho.asymmetry)
        self.min_eigenvalue = min(self.min_eigenvalue, rho.min_eigenvalue())

    def as_dict(self) -> dict:
        return {
            "residual_max": self.residual_max,
            "asymmetry_max": self.asymmetry_max,
            "min_eigenvalue": self.min_eigenvalue,
        }


def _attach_abscissa(err: SingularSystem, variable: str, value: float) -> SingularSystem:
    wrapped = SingularSystem(f"{err} (at {variable} = {value:g})")
    wrapped.abscissa = value
    return wrapped


def _field_annotations(system: SpinSystem) -> tuple[LcAnnotation, ...]:
    return tuple(
        LcAnnotation(f"{e.state_block}:{e.family}", e.b_cross)
        for e in build_catalog(system)
        if e.branches is not None or not np.any(system.hfc(e.state_block) != 0.0)
    )


def _frequency_annotations(system: SpinSystem, b: float) -> tuple[LcAnnotation, ...]:
    out = []
    for block in ("gs", "es"):
        two_d = 2.0 * system.zfs(block)
        for sign, tag in ((-1.0, "(-3/2,-1/2)"), (+1.0, "(+3/2,+1/2)")):
            f_mhz = units.rad_per_ns_to_mhz(system.gamma_e * abs(two_d + sign * b))
            out.append(LcAnnotation(f"{block}:esr{tag}", f_mhz))
    return tuple(out)


def pl_field_sweep(
    system: SpinSystem,
    rates: RateScheme,
    spec: SweepSpec,
    *,
    with_perturbation: bool = True,
    swap_isc_branching: bool = False,
    threads: int = 1,
    jumps: JumpOperatorSet | None = None,
) -> SweepResult:
    """Photoluminescence versus static field, no microwave drive."""
    if spec.variable != FIELD_VARIABLE:
        raise ValueError("pl_field_sweep needs a field_mT sweep")
    if jumps is None:
        jumps = build_jump_operators(rates, swap_isc_branching=swap_isc_branching)
    dissipator = dissipator_superoperator(jumps)
    grid = spec.grid()
    diag = _Diagnostics()

    def point(i: int) -> float:
        b = grid[i]
        h = build_lab_hamiltonian(system, b, with_perturbation=with_perturbation)
        try:
            rho, residual = _solve(assemble_liouvillian(h, jumps, dissipator=dissipator))
        except SingularSystem as err:
            raise _attach_abscissa(err, spec.variable, b) from err
        diag.record(rho, residual)
        return pl_intensity(rho, rates)

    raw = np.array(_run_points(point, spec.points, threads))
    return SweepResult(
        abscissa=grid,
        values=_normalize(raw, spec, grid),
        raw=raw,
        spec=spec,
        annotations=_field_annotations(system),
        diagnostics=diag.as_dict(),
    )


def pl_derivative_sweep(
    system: SpinSystem,
    rates: RateScheme,
    spec: SweepSpec,
    *,
    with_perturbation: bool = True,
    swap_isc_branching: bool = False,
    threads: int = 1,
    jumps: JumpOperatorSet | None = None,
) -> SweepResult:
    """Central-difference dPL/dB versus static field.

    Each grid point costs two steady-state solves at b -/+ derivative_step;
    grid points do not share solves, so the result is identical no matter
    how the grid is partitioned.
    """
    if spec.variable != FIELD_VARIABLE:
        raise ValueError("pl_derivative_sweep needs a field_mT sweep")
    if jumps is None:
        jumps = build_jump_operators(rates, swap_isc_branching=swap_isc_branching)
    dissipator = dissipator_superoperator(jumps)
    grid = spec.grid()
    step = spec.derivative_step
    diag = _Diagnostics()

    def intensity_at(b: float) -> float:
        h = build_lab_hamiltonian(system, b, with_perturbation=with_perturbation)
        try:
            rho, residual = _solve(assemble_liouvillian(h, jumps, dissipator=dissipator))
        except SingularSystem as err:
            raise _attach_abscissa(err, spec.variable, b) from err
        diag.record(rho, residual)
        return pl_intensity(rho, rates)

    def point(i: int) -> float:
        b = grid[i]
        return (intensity_at(b + step) - intensity_at(b - step)) / (2.0 * step)

    raw = np.array(_run_points(point, spec.points, threads))
    return SweepResult(
        abscissa=grid,
        values=_normalize(raw, spec, grid),
        raw=raw,
        spec=spec,
        annotations=_field_annotations(system),
        diagnostics=diag.as_dict(),
    )


def odmr_frequency_sweep(
    system: SpinSystem,
    rates: RateScheme,
    spec: SweepSpec,
    *,
    perturbations_in_odmr: bool = False,
    swap_isc_branching: bool = False,
    threads: int = 1,
) -> SweepResult:
    """ODMR contrast versus drive frequency at fixed static field.

    The drive-off reference lives in the same rotating frame as the driven
    problem.  Without the (frame-mixing) misalignment perturbations the
    reference steady state is frame-independent, so it is solved once per
    sweep; with them it is recomputed at every frequency.
    """
    if spec.variable != FREQUENCY_VARIABLE:
        raise ValueError("odmr_frequency_sweep needs an rf_frequency_MHz sweep")
    if not spec.fixed.b1 > 0.0:
        raise ValueError("odmr needs a positive drive amplitude b1")
    jumps = build_jump_operators(rates, swap_isc_branching=swap_isc_branching)
    dissipator = dissipator_superoperator(jumps) + dissipator_superoperator(_nuclear_leak_jumps())
    grid = spec.grid()
    b = spec.fixed.b
    diag = _Diagnostics()

    def contrast(omega: float) -> float:
        on = FieldConfig(b=b, b1=spec.fixed.b1, omega_rf=omega, rf_on=True)
        h_on = build_odmr_hamiltonian(system, on, with_perturbation=perturbations_in_odmr)
        rho_on, res_on = _solve(assemble_liouvillian(h_on, jumps, dissipator=dissipator))
        diag.record(rho_on, res_on)
        return pl_intensity(rho_on, rates)

    def reference(omega: float) -> float:
        off = FieldConfig(b=b, b1=0.0, omega_rf=omega, rf_on=False)
        h_off = build_odmr_hamiltonian(system, off, with_perturbation=perturbations_in_odmr)
        rho_off, res_off = _solve(assemble_liouvillian(h_off, jumps, dissipator=dissipator))
        diag.record(rho_off, res_off)
        return pl_intensity(rho_off, rates)

    try:
        if perturbations_in_odmr:
            def point(i: int) -> float:
                omega = units.mhz_to_rad_per_ns(grid[i])
                return contrast(omega) - reference(omega)

            raw = np.array(_run_points(point, spec.points, threads))
        else:
            pl_off = reference(0.0)

            def point(i: int) -> float:
                return contrast(units.mhz_to_rad_per_ns(grid[i])) - pl_off

            raw = np.array(_run_points(point, spec.points, threads))
    except SingularSystem as err:
        raise _attach_abscissa(err, spec.variable, getattr(err, "abscissa", math.nan)) from err

    return SweepResult(
        abscissa=grid,
        values=_normalize(raw, spec, grid),
        raw=raw,
        spec=spec,
        annotations=_frequency_annotations(system, b),
        diagnostics=diag.as_dict(),
    )


def odmr_field_sweep(
    system: SpinSystem,
    rates: RateScheme,
    spec: SweepSpec,
    *,
    perturbations_in_odmr: bool = False,
    swap_isc_branching: bool = False,
    threads: int = 1,
) -> SweepResult:
    """ODMR contrast versus static field at fixed drive frequency.

    The drive-off reference depends on the field, so every point costs two
    steady-state solves.
    """
    if spec.variable != FIELD_VARIABLE:
        raise ValueError("odmr_field_sweep needs a field_mT sweep")
    if not spec.fixed.b1 > 0.0:
        raise ValueError("odmr needs a positive drive amplitude b1")
    jumps = build_jump_operators(rates, swap_isc_branching=swap_isc_branching)
    dissipator = dissipator_superoperator(jumps) + dissipator_superoperator(_nuclear_leak_jumps())
    grid = spec.grid()
    omega = spec.fixed.omega_rf
    diag = _Diagnostics()

    def solve_at(b: float, b1: float, rf_on: bool) -> float:
        cfg = FieldConfig(b=b, b1=b1, omega_rf=omega, rf_on=rf_on)
        h = build_odmr_hamiltonian(system, cfg, with_perturbation=perturbations_in_odmr)
        try:
            rho, residual = _solve(assemble_liouvillian(h, jumps, dissipator=dissipator))
        except SingularSystem as err:
            raise _attach_abscissa(err, spec.variable, b) from err
        diag.record(rho, residual)
        return pl_intensity(rho, rates)

    def point(i: int) -> float:
        b = grid[i]
        return solve_at(b, spec.fixed.b1, True) - solve_at(b, 0.0, False)

    raw = np.array(_run_points(point, spec.points, threads))
    return SweepResult(
        abscissa=grid,
        values=_normalize(raw, spec, grid),
        raw=raw,
        spec=spec,
        annotations=_field_annotations(system),
        diagnostics=diag.as_dict(),
    )


@dataclass(frozen=True)
class RelativeOdmr:
    """Ground-state population-difference signals and their ratio.

    s1 compares the -3/2 and -1/2 sublevels, s2 the +3/2 and +1/2 ones;
    their ratio tracks the relative strength of the two ODMR lines.
    degenerate flags a vanishing denominator; ratio is NaN in that case
    rather than raising, since the quantity is diagnostic.
    """

    s1: float
    s2: float
    ratio: float
    degenerate: bool


_P_GS_M32 = projector(GS, -1.5)
_P_GS_M12 = projector(GS, -0.5)
_P_GS_P32 = projector(GS, 1.5)
_P_GS_P12 = projector(GS, 0.5)


def relative_odmr(rho: BlockDensityMatrix) -> RelativeOdmr:
    m = rho.matrix
    s1 = float(np.trace(_P_GS_M32 @ m).real - np.trace(_P_GS_M12 @ m).real)
    s2 = float(np.trace(_P_GS_P32 @ m).real - np.trace(_P_GS_P12 @ m).real)
    if abs(s2) < 1e-14:
        return RelativeOdmr(s1=s1, s2=s2, ratio=math.nan, degenerate=True)
    return RelativeOdmr(s1=s1, s2=s2, ratio=s1 / s2, degenerate=False)


def sweep_with_overrides(spec: SweepSpec, **changes) -> SweepSpec:
    """A copy of spec with the given fields replaced (validation re-runs)."""
    return replace(spec, **changes)
