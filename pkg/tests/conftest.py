"""Shared fixtures and small numeric helpers used across the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from silvac.hamiltonians import vsi_system
from silvac.kinetics import JumpOperatorSet, build_jump_operators, vsi_rates
from silvac.observables import NUCLEAR_LEAK_RATE


@pytest.fixture(scope="session")
def default_system():
    return vsi_system()


@pytest.fixture(scope="session")
def aligned_system():
    return vsi_system(theta=0.0)


@pytest.fixture(scope="session")
def table_rates():
    return vsi_rates()


@pytest.fixture(scope="session")
def default_jumps(table_rates):
    return build_jump_operators(table_rates)


def local_extrema(x: np.ndarray, y: np.ndarray) -> list[tuple[float, str, float]]:
    """Interior sign changes of the first difference: (position, 'max'|'min', value)."""
    d = np.diff(y)
    out = []
    for i in range(len(d) - 1):
        if d[i] == 0.0:
            continue
        if d[i] * d[i + 1] < 0:
            kind = "max" if d[i] > 0 else "min"
            out.append((float(x[i + 1]), kind, float(y[i + 1])))
    return out


def window_residual(
    x: np.ndarray,
    y: np.ndarray,
    lo: float,
    hi: float,
    margin_frac: float = 0.18,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Window of [lo, hi] detrended by a quadratic fitted to its edges.
    Returns (x_window, residual, edge point count)."""
    m = (x >= lo) & (x <= hi)
    xw, yw = x[m], y[m]
    n = len(xw)
    if n < 12:
        raise ValueError("window too narrow for background fit")
    k = max(3, int(margin_frac * n))
    edge = np.r_[0:k, n - k : n]
    coef = np.polyfit(xw[edge], yw[edge], 2)
    return xw, yw - np.polyval(coef, xw), k


def window_feature(
    x: np.ndarray,
    y: np.ndarray,
    lo: float,
    hi: float,
    margin_frac: float = 0.18,
) -> tuple[float, float, float]:
    """Largest residual bump inside [lo, hi] after removing a quadratic fitted
    to the window edges.  Returns (center, signed amplitude, edge residual rms);
    |amplitude| / rms is the significance of the bump against local background.
    """
    xw, r, k = window_residual(x, y, lo, hi, margin_frac)
    n = len(xw)
    edge = np.r_[0:k, n - k : n]
    erms = float(np.sqrt(np.mean(r[edge] ** 2)))
    inner = r.copy()
    inner[:k] = 0.0
    inner[n - k :] = 0.0
    i = int(np.argmax(np.abs(inner)))
    return float(xw[i]), float(r[i]), erms


def feature_fwhm(x: np.ndarray, y: np.ndarray, center: float) -> float:
    """Full width at half maximum of the |y| bump nearest `center`, by walking
    to the half-crossings on both sides (linear interpolation between samples).
    """
    i0 = int(np.argmin(np.abs(x - center)))
    sign = 1.0 if y[i0] >= 0 else -1.0
    z = sign * y
    half = z[i0] / 2.0
    left = x[0]
    for i in range(i0, 0, -1):
        if z[i - 1] <= half:
            f = (z[i] - half) / (z[i] - z[i - 1])
            left = x[i] - f * (x[i] - x[i - 1])
            break
    right = x[-1]
    for i in range(i0, len(z) - 1):
        if z[i + 1] <= half:
            f = (z[i] - half) / (z[i] - z[i + 1])
            right = x[i] + f * (x[i + 1] - x[i])
            break
    return float(right - left)


def with_nuclear_leak(jumps: JumpOperatorSet, rate: float = NUCLEAR_LEAK_RATE) -> JumpOperatorSet:
    """Append symmetric nuclear spin flips; regularizes field sweeps whose
    nuclear sectors would otherwise decouple (uncoupled or zero hyperfine)."""
    amp = np.sqrt(rate)
    up = amp * np.kron(np.eye(9), np.array([[0.0, 1.0], [0.0, 0.0]]))
    down = amp * np.kron(np.eye(9), np.array([[0.0, 0.0], [1.0, 0.0]]))
    return JumpOperatorSet(
        operators=(*jumps.operators, up, down),
        labels=(*jumps.labels, "nuclear_leak_up", "nuclear_leak_down"),
    )


def random_hermitian_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
