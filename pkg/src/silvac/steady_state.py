"""Steady-state solve and a time-propagation cross-check.

The generator of the pumping cycle has a one-dimensional null space, so the
stationarity system L vec(rho) = 0 is closed by replacing one of its rows
with the trace functional Tr(rho) = 1 and solving the resulting square
system directly.  A fixed-step fourth-order propagator provides an
independent route to the same state for validation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .kinetics import Liouvillian
from .spin_algebra import DIM_TOTAL, basis_labels, block_slice

#: Reciprocal-condition floor below which the closed system is treated as
#: singular (degenerate rate scheme or multi-dimensional null space).
RCOND_FLOOR = 1e-13


class SingularSystem(Exception):
    """The trace-closed stationarity system is numerically singular."""


class StepTooLarge(Exception):
    """Requested propagation step does not resolve the fastest timescale."""


@dataclass
class BlockDensityMatrix:
    """18x18 density matrix with gs(8) + es(8) + ms(2) block structure.

    Inter-block coherences are identically zero by construction; the
    constructor zeroes them, since no generator of this model populates
    them.

    Attributes:
        matrix: the density matrix.
        labels: basis-state labels matching the global ordering.
        asymmetry: max-norm of the anti-Hermitian part removed when the
            matrix was produced by a linear solve (diagnostic).
    """

    matrix: np.ndarray
    labels: tuple[str, ...] = basis_labels()
    asymmetry: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (DIM_TOTAL, DIM_TOTAL):
            raise ValueError(f"expected {DIM_TOTAL}x{DIM_TOTAL}, got {m.shape}")
        _zero_off_blocks(m)
        self.matrix = m

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))))

    def block(self, name: str) -> np.ndarray:
        s = block_slice(name)
        return self.matrix[s, s]

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))


def _zero_off_blocks(m: np.ndarray) -> None:
    for a in ("gs", "es", "ms"):
        for b in ("gs", "es", "ms"):
            if a != b:
                m[block_slice(a), block_slice(b)] = 0.0


def _trace_row(n: int) -> np.ndarray:
    row = np.zeros(n * n, dtype=complex)
    row[:: n + 1] = 1.0
    return row


def solve_steady_state(l: Liouvillian, *, replaced_row: int = -1) -> BlockDensityMatrix:
    """Stationary density matrix of the generator.

    Replaces one row of L (the last, by default) with the trace row, solves
    with a pivoted LU factorization plus one step of iterative refinement,
    then symmetrizes and renormalizes.  The pre-symmetrization asymmetry is
    kept on the result as a diagnostic.

    Args:
        l: assembled generator.
        replaced_row: which stationarity equation to sacrifice for the
            normalization constraint.  Any row gives the same state (the
            dropped equation is linearly dependent on the rest); the
            parameter exists so that independence can be tested.

    Raises:
        SingularSystem: if the closed system's condition estimate exceeds
            1/RCOND_FLOOR, which signals an all-zero rate scheme or a
            multi-dimensional null space (e.g. decoupled sectors).
    """
    n = l.dim
    m = np.array(l.matrix, dtype=complex)
    row = range(n * n)[replaced_row]
    m[row, :] = _trace_row(n)
    rhs = np.zeros(n * n, dtype=complex)
    rhs[row] = 1.0

    anorm = np.linalg.norm(m, 1)
    lu, piv, info = lapack.zgetrf(m)
    if info > 0:
        raise SingularSystem("exactly singular stationarity system")
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    if rcond < RCOND_FLOOR:
        raise SingularSystem(
            f"stationarity system is numerically singular (rcond={rcond:.2e}); "
            "the generator does not have a unique steady state"
        )
    x, _ = lapack.zgetrs(lu, piv, rhs)
    # one refinement pass tightens the worst components near big rate contrasts
    residual = rhs - np.asarray(l.matrix) @ x
    residual[row] = 1.0 - _trace_row(n) @ x
    dx, _ = lapack.zgetrs(lu, piv, residual)
    x = x + dx

    rho = x.reshape((n, n), order="F")
    asymmetry = float(np.max(np.abs(rho - rho.conj().T)))
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.real(np.trace(rho))
    out = BlockDensityMatrix(matrix=rho, asymmetry=asymmetry)
    min_eig = out.min_eigenvalue()
    if min_eig < -1e-8:
        warnings.warn(
            f"steady state has negative population {min_eig:.2e}; "
            "this points at an assembly or modeling bug",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def propagate(l: Liouvillian, rho0: BlockDensityMatrix, t_final: float, dt: float) -> BlockDensityMatrix:
    """Evolve rho0 for t_final ns with fixed-step classical fourth-order steps.

    For a constant linear generator the classical Runge-Kutta step is the
    degree-4 Taylor polynomial of exp(dt*L); the full evolution is that
    one-step matrix raised to the number of steps (by binary powering), so
    arbitrarily long horizons stay cheap and bit-deterministic.  The trace
    row annihilates L, hence every Taylor term, so the trace is conserved to
    roundoff.

    Args:
        l: generator.
        rho0: initial state.
        t_final: total evolution time, ns.
        dt: requested step, ns; the actual step divides t_final exactly and
            never exceeds dt.

    Raises:
        StepTooLarge: if dt * ||L||_inf > 0.1, i.e. the step does not
            resolve the fastest timescale of the generator.
    """
    if t_final < 0 or dt <= 0:
        raise ValueError("t_final must be >= 0 and dt > 0")
    mat = np.asarray(l.matrix)
    norm = np.linalg.norm(mat, np.inf)
    if norm > 0 and dt * norm > 0.1:
        raise StepTooLarge(f"dt={dt} exceeds 0.1/||L||_inf = {0.1 / norm:.3e} ns")
    if t_final == 0:
        return BlockDensityMatrix(matrix=rho0.matrix.copy())

    steps = max(1, int(np.ceil(t_final / dt)))
    h = t_final / steps
    n = l.dim
    eye = np.eye(n * n, dtype=complex)
    hl = h * mat
    phi = eye + hl @ (eye + hl @ (eye / 2.0 + hl @ (eye / 6.0 + hl / 24.0)))

    x = rho0.matrix.reshape(n * n, order="F").astype(complex)
    # binary powering of the one-step matrix
    power = phi
    k = steps
    while k:
        if k & 1:
            x = power @ x
        k >>= 1
        if k:
            power = power @ power
    rho = x.reshape((n, n), order="F")
    return BlockDensityMatrix(matrix=rho)
