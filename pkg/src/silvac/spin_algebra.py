"""Spin operators, tensor products and projectors.

The model space is a quartet (S = 3/2) electron spin coupled to a single
spin-1/2 nucleus in two optically active electronic states, plus a shelving
manifold whose electron-spin structure is ignored:

    gs block  (8 levels)   indices  0..7
    es block  (8 levels)   indices  8..15
    ms block  (2 levels)   indices 16..17

The basis ordering is fixed globally: within the gs and es blocks the
electron runs over Sz = +3/2, +1/2, -1/2, -3/2 (descending) with the nuclear
spin as the fast index, alpha (up) before beta (down).  The ms block carries
the bare nuclear doublet.  The electron factor is always the left factor of
a Kronecker product, so a purely electronic 9x9 operator (4 gs + 4 es + ms)
embeds into the full space as ``kron(op, identity(2))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

GS = "gs"
ES = "es"
MS = "ms"

DIM_ELECTRON = 4
DIM_NUCLEUS = 2
DIM_BLOCK = DIM_ELECTRON * DIM_NUCLEUS
DIM_MS = 2
DIM_TOTAL = 2 * DIM_BLOCK + DIM_MS
DIM_ELECTRONIC = 2 * DIM_ELECTRON + 1

_BLOCK_SLICES = {
    GS: slice(0, DIM_BLOCK),
    ES: slice(DIM_BLOCK, 2 * DIM_BLOCK),
    MS: slice(2 * DIM_BLOCK, DIM_TOTAL),
}

#: Electron Sz values in basis order for the quartet.
QUARTET_SZ = (1.5, 0.5, -0.5, -1.5)

#: Convenience groups accepted by :func:`projector`.
PLUS_MINUS_HALF = (0.5, -0.5)
PLUS_MINUS_THREE_HALF = (1.5, -1.5)

_NUCLEAR_TAGS = ("a", "b")


@dataclass(frozen=True)
class SpinOperatorSet:
    """Angular-momentum matrices for a single spin in the |s>, ..., |-s> basis.

    Attributes:
        s: spin quantum number.
        sx, sy, sz: Cartesian components.
        s_plus, s_minus: ladder operators, s_plus = sx + i sy.
    """

    s: float
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray


def build_spin_operators(s: float) -> SpinOperatorSet:
    """Construct spin matrices of dimension 2s+1 in the Sz-descending basis.

    Args:
        s: spin quantum number; 2s must be a nonnegative integer.

    Raises:
        ValueError: if s is not half-integer or is negative.
    """
    two_s = 2.0 * s
    if s < 0 or abs(two_s - round(two_s)) > 1e-12:
        raise ValueError(f"spin quantum number must be half-integer, got {s}")
    dim = int(round(two_s)) + 1
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    s_plus = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        # <m+1| S+ |m> = sqrt(s(s+1) - m(m+1)) on the sub-diagonal of the
        # descending basis
        mm = m[k]
        s_plus[k - 1, k] = np.sqrt(s * (s + 1) - mm * (mm + 1))
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2.0
    sy = (s_plus - s_minus) / 2.0j
    return SpinOperatorSet(s=s, sx=sx, sy=sy, sz=sz, s_plus=s_plus, s_minus=s_minus)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor as the slow (outer) index.

    By the module-wide convention the electron operator is always passed
    first and the nuclear operator second.
    """
    return np.kron(np.asarray(a), np.asarray(b))


def block_slice(block: str) -> slice:
    """Index range of an electronic block within the 18-dim space."""
    try:
        return _BLOCK_SLICES[block]
    except KeyError:
        raise ValueError(f"unknown block {block!r}; expected one of 'gs', 'es', 'ms'") from None


def embed_electronic(op: np.ndarray) -> np.ndarray:
    """Embed a 9x9 electronic-level operator into the full 18-dim space.

    The nuclear factor is untouched (identity), which encodes that the
    electronic transition amplitudes do not depend on the nuclear state.
    """
    op = np.asarray(op)
    if op.shape != (DIM_ELECTRONIC, DIM_ELECTRONIC):
        raise ValueError(f"expected a {DIM_ELECTRONIC}x{DIM_ELECTRONIC} electronic operator, got {op.shape}")
    return np.kron(op, np.eye(DIM_NUCLEUS))


def projector(block: str, subset: Union[float, Iterable[float]]) -> np.ndarray:
    """Projector onto a group of electron Sz states of one optical block.

    Acts as the identity on the nuclear factor and vanishes outside the
    requested block.

    Args:
        block: "gs" or "es".  The shelving block has no electron-spin
            structure, so "ms" is rejected.
        subset: a single Sz value or an iterable of values drawn from
            {+3/2, +1/2, -1/2, -3/2}.

    Returns:
        An 18x18 real projector matrix (idempotent, Hermitian).
    """
    if block == MS:
        raise ValueError("the shelving block carries no electron-spin projectors")
    offset = block_slice(block).start
    if isinstance(subset, (int, float)):
        subset = (float(subset),)
    values = tuple(float(v) for v in subset)
    if not values:
        raise ValueError("empty spin-state subset")
    proj = np.zeros((DIM_TOTAL, DIM_TOTAL))
    for v in values:
        matches = [i for i, m in enumerate(QUARTET_SZ) if abs(m - v) < 1e-12]
        if not matches:
            raise ValueError(f"Sz value {v} is not in the quartet {QUARTET_SZ}")
        e = matches[0]
        for n in range(DIM_NUCLEUS):
            k = offset + DIM_NUCLEUS * e + n
            proj[k, k] = 1.0
    return proj


def basis_labels() -> tuple[str, ...]:
    """Human-readable labels of the 18 basis states, in order."""
    labels = []
    for blk in (GS, ES):
        for m in QUARTET_SZ:
            for nuc in _NUCLEAR_TAGS:
                labels.append(f"{blk}({m:+.1f}),{nuc}")
    for nuc in _NUCLEAR_TAGS:
        labels.append(f"ms,{nuc}")
    return tuple(labels)
