"""Optical-cycle kinetics: jump operators and the Liouvillian superoperator.

The pumping cycle couples the nine electronic levels (4 gs + 4 es + ms):
spin-conserving optical pumping gs -> es at rate I, spin-selective
fluorescence es -> gs (k1_fl for the |±1/2> pair, k2_fl for |±3/2>),
spin-selective shelving es -> ms (k1_isc from |±1/2>, k2_isc from |±3/2>)
and return ms -> gs feeding only the |±1/2> pair (kprime_isc).  Every
transition becomes its own rank-one jump operator; a single composite matrix
would generate spurious coherence transfer between, e.g., the two gs levels
fed from the shelf.

Density matrices are vectorized by column stacking, vec(rho)[j*18+i] =
rho[i, j], and the generator of d(rho)/dt = -i[H, rho] + sum_k (L rho L^+
- {L^+L, rho}/2) takes the standard form

    -i (I (x) H - H^T (x) I)
    + sum_k [ conj(L_k) (x) L_k - I (x) (L_k^+ L_k)/2 - (L_k^+ L_k)^T (x) I/2 ].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import BlockHamiltonian
from .spin_algebra import DIM_ELECTRONIC, DIM_TOTAL, embed_electronic

# electronic level indices (see spin_algebra: gs quartet, es quartet, shelf)
_GS = {1.5: 0, 0.5: 1, -0.5: 2, -1.5: 3}
_ES = {m: 4 + i for m, i in _GS.items()}
_SHELF = 8


@dataclass(frozen=True)
class RateScheme:
    """The six kinetic rates of the optical cycle, ns^-1.

    Attributes:
        pump_i: optical pumping rate gs -> es (spin conserving).
        k1_fl, k2_fl: fluorescence rates from the es |±1/2> and |±3/2> pairs.
        k1_isc, k2_isc: shelving rates from the es |±1/2> and |±3/2> pairs.
        kprime_isc: return rate from the shelf into each gs |±1/2> level.
    """

    pump_i: float
    k1_fl: float
    k2_fl: float
    k1_isc: float
    k2_isc: float
    kprime_isc: float

    def __post_init__(self):
        for name in ("pump_i", "k1_fl", "k2_fl", "k1_isc", "k2_isc", "kprime_isc"):
            if getattr(self, name) < 0:
                raise ValueError(f"rate {name} must be nonnegative")


def vsi_rates() -> RateScheme:
    """Fitted literature rates for the silicon-vacancy optical cycle."""
    return RateScheme(pump_i=0.01, k1_fl=0.05, k2_fl=0.1, k1_isc=0.2, k2_isc=0.01, kprime_isc=0.01)


@dataclass(frozen=True)
class JumpOperatorSet:
    """Rank-one jump operators embedded into the 18-dim space.

    Each operator is sqrt(rate) * |n><m| on the electronic levels, tensored
    with the nuclear identity: transition rates do not depend on the nuclear
    spin state.
    """

    operators: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.operators)


def _transition(rate: float, src: int, dst: int) -> np.ndarray:
    op = np.zeros((DIM_ELECTRONIC, DIM_ELECTRONIC))
    op[dst, src] = np.sqrt(rate)
    return embed_electronic(op)


def build_jump_operators(rates: RateScheme, *, swap_isc_branching: bool = False) -> JumpOperatorSet:
    """One jump operator per nonzero transition of the pumping cycle.

    Args:
        rates: the six cycle rates.
        swap_isc_branching: exchange the shelving-rate assignment between the
            es |±1/2> and |±3/2> pairs (an alternative convention that
            appears in part of the literature; the default follows the
            spin-selectivity stated above).
    """
    k1, k2 = rates.k1_isc, rates.k2_isc
    if swap_isc_branching:
        k1, k2 = k2, k1
    ops: list[np.ndarray] = []
    labels: list[str] = []

    def add(rate: float, src: int, dst: int, label: str) -> None:
        if rate > 0.0:
            ops.append(_transition(rate, src, dst))
            labels.append(label)

    for m in (1.5, 0.5, -0.5, -1.5):
        add(rates.pump_i, _GS[m], _ES[m], f"pump gs({m:+.1f})->es({m:+.1f})")
    for m in (0.5, -0.5):
        add(rates.k1_fl, _ES[m], _GS[m], f"fluorescence es({m:+.1f})->gs({m:+.1f})")
    for m in (1.5, -1.5):
        add(rates.k2_fl, _ES[m], _GS[m], f"fluorescence es({m:+.1f})->gs({m:+.1f})")
    for m in (0.5, -0.5):
        add(k1, _ES[m], _SHELF, f"shelving es({m:+.1f})->ms")
    for m in (1.5, -1.5):
        add(k2, _ES[m], _SHELF, f"shelving es({m:+.1f})->ms")
    for m in (0.5, -0.5):
        add(rates.kprime_isc, _SHELF, _GS[m], f"return ms->gs({m:+.1f})")

    return JumpOperatorSet(operators=tuple(ops), labels=tuple(labels))


@dataclass(frozen=True)
class Liouvillian:
    """Dense generator acting on column-stacked 18x18 density matrices."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        """Hilbert-space dimension the generator acts on."""
        return int(round(np.sqrt(self.matrix.shape[0])))


def hamiltonian_superoperator(h: np.ndarray) -> np.ndarray:
    """Column-stacked superoperator of -i[H, .] for an n x n Hamiltonian."""
    n = h.shape[0]
    eye = np.eye(n)
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_superoperator(jumps: JumpOperatorSet) -> np.ndarray:
    """Column-stacked superoperator of the full Lindblad dissipator.

    This part is independent of the magnetic field, so sweep drivers build
    it once and reuse it at every field point.
    """
    if len(jumps) == 0:
        return np.zeros((DIM_TOTAL**2, DIM_TOTAL**2))
    n = jumps.operators[0].shape[0]
    eye = np.eye(n)
    out = np.zeros((n * n, n * n), dtype=complex)
    for op in jumps.operators:
        rate_op = op.conj().T @ op
        out += np.kron(op.conj(), op)
        out -= 0.5 * np.kron(eye, rate_op)
        out -= 0.5 * np.kron(rate_op.T, eye)
    return out


def assemble_liouvillian(h: BlockHamiltonian, jumps: JumpOperatorSet, *, dissipator: np.ndarray | None = None) -> Liouvillian:
    """Full generator for the given Hamiltonian blocks and jump operators.

    Args:
        h: block Hamiltonian (any Hermitian blocks).
        jumps: jump-operator set; must live in the same 18-dim space.
        dissipator: optional precomputed ``dissipator_superoperator(jumps)``
            to amortize across a sweep.

    Raises:
        ValueError: on dimension mismatch between h and jumps.
    """
    full_h = h.full()
    if len(jumps) and jumps.operators[0].shape != full_h.shape:
        raise ValueError("jump operators and Hamiltonian act on different spaces")
    if dissipator is None:
        dissipator = dissipator_superoperator(jumps)
    return Liouvillian(matrix=hamiltonian_superoperator(full_h) + dissipator)
