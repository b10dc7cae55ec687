"""Analytic level-crossing/anti-crossing atlas and a numeric gap finder.

With the defect axis aligned and only the secular hyperfine term kept, the
eight levels of a quartet-electron x spin-1/2-nucleus block are linear in
field and their crossings have closed-form positions.  Each electron-only
crossing (Delta Sz = 1 at gamma_e*B = 2D, Delta Sz = 2 at gamma_e*B = D)
splits into four hyperfine-resolved crossings.  Perturbations lift specific
crossings into avoided crossings with a minimal splitting of twice the
mixing matrix element; this module computes those elements in closed form
(first order for the hyperfine flip terms and the tilt-induced Zeeman terms,
second order for the double-quantum crossings fed by combined isotropic and
anisotropic hyperfine couplings) and provides an eigenvalue-tracking scan
that measures the true minimal gap for cross-validation.

Energy-branch numbering: branches are ordered by electron Sz descending
with the nuclear spin fast, i.e.

    1: (+3/2, a)   2: (+3/2, b)   3: (+1/2, a)   4: (+1/2, b)
    5: (-1/2, a)   6: (-1/2, b)   7: (-3/2, a)   8: (-3/2, b)

which also matches each branch's dominant character at high field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .hamiltonians import SpinSystem, build_perturbation, build_state_hamiltonian
from .spin_algebra import ES, GS


class DegenerateGamma(Exception):
    """A crossing-field denominator vanished for the given gyromagnetic ratios."""


class VanishingDenominator(Exception):
    """A perturbation-theory denominator vanished (2D ~ ±Azz)."""


class NoCrossingInWindow(Exception):
    """The tracked pair's gap is monotonic across the requested window."""


#: (electron Sz, nuclear tag) for branches 1..8.
BRANCH_STATES = {
    1: (1.5, "a"),
    2: (1.5, "b"),
    3: (0.5, "a"),
    4: (0.5, "b"),
    5: (-0.5, "a"),
    6: (-0.5, "b"),
    7: (-1.5, "a"),
    8: (-1.5, "b"),
}

#: Crossing branch pairs of the eight hyperfine-resolved level crossings.
LC_PAIRS = {
    "lc-1a": (6, 7),
    "lc-1b": (5, 7),
    "lc-1c": (6, 8),
    "lc-1d": (5, 8),
    "lc-2a": (3, 7),
    "lc-2b": (4, 7),
    "lc-2c": (3, 8),
    "lc-2d": (4, 8),
}


def branch_label(branch: int) -> str:
    m, nuc = BRANCH_STATES[branch]
    return f"({m:+.1f},{nuc})"


def analytic_energies(
    d: float,
    b: float,
    azz: float,
    gamma_ratio: float,
    *,
    gamma_e: float = units.GAMMA_E,
) -> np.ndarray:
    """Secular-model energies of branches 1..8 in rad/ns.

    Valid when only the Sz*Iz part of the hyperfine tensor is active (the
    regime in which the branches stay pure |Sz, nucleus> states at every
    field).

    Args:
        d: axial ZFS in mT.
        b: static field in mT.
        azz: secular hyperfine component in mT.
        gamma_ratio: signed gamma_n / gamma_e.
        gamma_e: electron gyromagnetic ratio, rad ns^-1 mT^-1.
    """
    energies = np.empty(8)
    for branch, (m, nuc) in BRANCH_STATES.items():
        n = 0.5 if nuc == "a" else -0.5
        e_mt = d * (m * m - 1.25) + b * m - gamma_ratio * b * n + azz * m * n
        energies[branch - 1] = gamma_e * e_mt
    return energies


def lc_positions(
    d: float,
    azz: float,
    gamma_ratio: float,
) -> dict[str, float]:
    """Crossing fields (mT) of the eight hyperfine-resolved level crossings.

    The nuclear Zeeman term enters through the dimensionless ratio
    gamma_n/gamma_e, so the result is independent of the absolute
    gyromagnetic scale.

    Raises:
        DegenerateGamma: if a gyromagnetic denominator vanishes.
    """
    a = azz
    r = gamma_ratio
    table = {
        "lc-1a": (2 * d - a, 1.0 + r),
        "lc-1b": (2 * d - a / 2, 1.0),
        "lc-1c": (2 * d + a / 2, 1.0),
        "lc-1d": (2 * d + a, 1.0 - r),
        "lc-2a": (d - a / 2, 1.0),
        "lc-2b": (d - a / 4, 1.0 + r / 2),
        "lc-2c": (d + a / 4, 1.0 - r / 2),
        "lc-2d": (d + a / 2, 1.0),
    }
    out = {}
    for family, (numerator, denominator) in table.items():
        if abs(denominator) < 1e-12:
            raise DegenerateGamma(f"{family}: gyromagnetic denominator vanishes (ratio={r})")
        out[family] = numerator / denominator
    return out


@dataclass(frozen=True)
class PerturbativeMixing:
    """Hyperfine mixing elements of one block, and their double-quantum assembly.

    First-order flip matrix elements v1..v6 (and the isotropic flip-flop
    element v_iso) are in rad/ns.  The admixture coefficients q1..q6 are
    dimensionless and carry NaN unless the double-quantum assembly was
    evaluated.  eff_alpha/eff_beta are the effective couplings of
    the (+1/2,a)/(-3/2,a) and (+1/2,b)/(-3/2,b) crossing pairs computed from
    the admixed states including their mutual overlap; estimate_alpha and
    estimate_beta are the simpler closed forms that drop the overlap
    correction and underestimate the coupling by roughly a factor of two
    when the secular component is small.
    """

    v_iso: float
    v1: float
    v2: float
    v3: float
    v4: float
    v5: float
    v6: float
    q1: float = math.nan
    q2: float = math.nan
    q3: float = math.nan
    q4: float = math.nan
    q5: float = math.nan
    q6: float = math.nan
    eff_alpha: float = math.nan
    eff_beta: float = math.nan
    estimate_alpha: float = math.nan
    estimate_beta: float = math.nan
    field_condition: str = ""
    gamma_e: float = units.GAMMA_E

    @property
    def q_max(self) -> float:
        qs = [abs(q) for q in (self.q1, self.q2, self.q3, self.q4, self.q5, self.q6) if not math.isnan(q)]
        return max(qs) if qs else math.nan

    @property
    def trustworthy(self) -> bool:
        """Perturbative-validity diagnostic: every admixture below 0.3."""
        return bool(self.q_max < 0.3)


def first_order_mixing(hfc, *, gamma_e: float = units.GAMMA_E) -> PerturbativeMixing:
    """First-order hyperfine mixing elements of a block, in rad/ns.

    The flip-flop part of the tensor (proportional to Axx+Ayy) connects
    states with Delta(Sz + Iz) = 0; the double-flip part (Axx-Ayy) connects
    Delta(Sz + Iz) = ±2 partners.
    """
    hfc = np.asarray(hfc, dtype=float)
    axx, ayy = hfc[0, 0], hfc[1, 1]
    s3 = math.sqrt(3.0)
    flip_flop = s3 / 4.0 * (axx + ayy)
    double = s3 / 4.0 * (axx - ayy)
    return PerturbativeMixing(
        v_iso=gamma_e * flip_flop,
        v1=gamma_e * flip_flop,
        v2=gamma_e * double,
        v3=gamma_e * flip_flop,
        v4=gamma_e * 0.5 * (axx - ayy),
        v5=gamma_e * 0.5 * (axx + ayy),
        v6=gamma_e * double,
        gamma_e=gamma_e,
    )


def second_order_lc2_elements(
    d: float,
    axx: float,
    ayy: float,
    azz: float,
    *,
    gamma_ratio: float = 0.0,
    gamma_e: float = units.GAMMA_E,
) -> PerturbativeMixing:
    """Effective double-quantum couplings at the two same-nucleus crossings.

    The flip terms of the hyperfine tensor admix the crossing states with
    the (-1/2) intermediate level; the admixed states then acquire a direct
    coupling.  Evaluated at each pair's own matching condition
    (omega_e = D -/+ Azz/2 for the alpha/beta pair).  All inputs in mT.

    Returns the full :class:`PerturbativeMixing` record: v1..v6, the
    admixtures q1..q6, the overlap-corrected elements (which the measured
    minimal gaps follow) and the overlap-free closed-form estimates.

    Raises:
        VanishingDenominator: when 2D ± Azz or a q-denominator vanishes.
    """
    base = first_order_mixing(np.diag([axx, ayy, azz]), gamma_e=gamma_e)
    v1, v2, v4, v5 = base.v1 / gamma_e, base.v2 / gamma_e, base.v4 / gamma_e, base.v5 / gamma_e
    v3, v6 = base.v3 / gamma_e, base.v6 / gamma_e

    out: dict[str, float] = {}
    for tag, sign in (("alpha", -1.0), ("beta", +1.0)):
        if abs(2 * d + sign * azz) < 1e-15:
            raise VanishingDenominator(f"2D {'+' if sign > 0 else '-'} Azz vanishes (d={d}, azz={azz})")
        we = d + sign * azz / 2.0
        wn = gamma_ratio * we
        if tag == "alpha":
            den = we - wn
            if abs(den) < 1e-15:
                raise VanishingDenominator("omega_e - omega_n vanishes at the alpha pair")
            qa, qb = v1 / den, v4 / den
            # intermediate level (-1/2,b): energies relative to / absolute at the crossing
            e_rel = -den
            e_abs = -d - we / 2.0 + wn / 2.0 + azz / 4.0
            out["q1"], out["q4"] = qa, qb
            out["q3"] = -v3 / (2 * d + we + wn - azz)
        else:
            den = we + wn
            if abs(den) < 1e-15:
                raise VanishingDenominator("omega_e + omega_n vanishes at the beta pair")
            qa, qb = v2 / den, v5 / den
            e_rel = -den
            e_abs = -d - we / 2.0 - wn / 2.0 - azz / 4.0
            out["q2"], out["q5"] = qa, qb
            out["q6"] = -v6 / (2 * d + we - wn + azz)
        va, vb = (v1, v4) if tag == "alpha" else (v2, v5)
        out[f"eff_{tag}"] = gamma_e * (qa * vb + qb * va + qa * qb * e_rel)
        out[f"estimate_{tag}"] = gamma_e * (qa * vb + qb * va + qa * qb * e_abs)

    return PerturbativeMixing(
        v_iso=base.v_iso,
        v1=base.v1,
        v2=base.v2,
        v3=base.v3,
        v4=base.v4,
        v5=base.v5,
        v6=base.v6,
        field_condition="omega_e = D - Azz/2 (alpha pair), omega_e = D + Azz/2 (beta pair)",
        gamma_e=gamma_e,
        **out,
    )


@dataclass(frozen=True)
class MisalignmentElement:
    """One tilt-induced mixing element, exact to first order in theta."""

    family: str
    pair: tuple[float, float]
    element: complex


def misalignment_elements(system: SpinSystem, b: float) -> tuple[MisalignmentElement, ...]:
    """Mixing elements of the three transverse Zeeman families at field b.

    Computed from the closed-form matrix elements (sqrt(3)/2 factors from
    the S = 3/2 ladder algebra), not from the assembled operator matrices,
    so they can serve as an independent check on the Hamiltonian builder:

        <-3/2| Sx-type |-1/2>                = (sqrt3/2) g_perp_1 mu_B B theta
        <-3/2| {Sx, Sz^2-3/4}-type |-1/2>    = (sqrt3/2) g_perp_2 mu_B B theta
        <-3/2| double-quantum |+1/2>         = -i (sqrt3/2) g_perp_3 mu_B B theta

    Each element is most relevant at its own crossing field (gamma_e B = 2D
    for the first two, gamma_e B = D for the third), where first-order
    degenerate theory applies.
    """
    factor = math.sqrt(3.0) / 2.0 * units.MU_B * b * system.theta
    return (
        MisalignmentElement("transverse_zeeman", (-1.5, -0.5), system.g_perp_1 * factor),
        MisalignmentElement("transverse_zeeman_quadratic", (-1.5, -0.5), system.g_perp_2 * factor),
        MisalignmentElement("transverse_double_quantum", (-1.5, 0.5), -1j * system.g_perp_3 * factor),
    )


@dataclass(frozen=True)
class LcCatalogEntry:
    """One crossing of the atlas.

    branches is None for the electron-only entries (hyperfine structure
    unresolved).  mixing_element is the first-order element between the
    crossing partners at b_cross (zero when no active perturbation connects
    them); second_order_element carries the effective double-quantum
    coupling for the two same-nucleus Delta Sz = 2 crossings.
    """

    state_block: str
    family: str
    b_cross: float
    branches: tuple[int, int] | None
    pair_labels: tuple[str, str]
    mixing_element: complex
    lifted_by: tuple[str, ...]
    second_order_element: float = 0.0

    @property
    def nuclear_flip(self) -> bool:
        """Whether the crossing partners differ in nuclear spin."""
        if self.branches is None:
            return False
        (_, n1), (_, n2) = (BRANCH_STATES[self.branches[0]], BRANCH_STATES[self.branches[1]])
        return n1 != n2

    @property
    def element_mt(self) -> float:
        return abs(self.mixing_element) / units.GAMMA_E

    @property
    def element_mhz(self) -> float:
        return units.rad_per_ns_to_mhz(abs(self.mixing_element))


def _tilt_elements(system: SpinSystem, b_cross: float) -> dict[str, complex]:
    elements = misalignment_elements(system, b_cross)
    return {e.family: e.element for e in elements}


def build_catalog(system: SpinSystem) -> tuple[LcCatalogEntry, ...]:
    """Crossing catalog of both optical blocks for the given system.

    Emits the two electron-only crossings per block always, and the eight
    hyperfine-resolved crossings per block when the block's hyperfine tensor
    is nonzero.
    """
    entries: list[LcCatalogEntry] = []
    r = system.gamma_n_over_gamma_e
    for block in (GS, ES):
        d = system.zfs(block)
        hfc = system.hfc(block)
        mixing = first_order_mixing(hfc, gamma_e=system.gamma_e)

        for family, b_cross, pair in (("lc-1", 2 * d, ("(-1/2)", "(-3/2)")), ("lc-2", d, ("(+1/2)", "(-3/2)"))):
            element, lifted = _electron_only_element(system, family, b_cross)
            entries.append(
                LcCatalogEntry(
                    state_block=block,
                    family=family,
                    b_cross=b_cross,
                    branches=None,
                    pair_labels=pair,
                    mixing_element=element,
                    lifted_by=lifted,
                )
            )

        if not np.any(hfc != 0.0):
            continue
        positions = lc_positions(d, hfc[2, 2], r)
        second = None
        if abs(hfc[0, 0]) != abs(hfc[1, 1]) and (hfc[0, 0] + hfc[1, 1]) != 0.0:
            second = second_order_lc2_elements(
                d, hfc[0, 0], hfc[1, 1], hfc[2, 2], gamma_ratio=r, gamma_e=system.gamma_e
            )
        for family, branches in LC_PAIRS.items():
            b_cross = positions[family]
            element, lifted = _hyperfine_entry_element(system, family, b_cross, mixing)
            second_element = 0.0
            if second is not None and family == "lc-2a":
                second_element = second.eff_alpha
            elif second is not None and family == "lc-2d":
                second_element = second.eff_beta
            entries.append(
                LcCatalogEntry(
                    state_block=block,
                    family=family,
                    b_cross=b_cross,
                    branches=branches,
                    pair_labels=(branch_label(branches[0]), branch_label(branches[1])),
                    mixing_element=element,
                    lifted_by=lifted,
                    second_order_element=second_element,
                )
            )
    return tuple(entries)


def _electron_only_element(system: SpinSystem, family: str, b_cross: float) -> tuple[complex, tuple[str, ...]]:
    tilt = _tilt_elements(system, b_cross)
    if family == "lc-1":
        element = tilt["transverse_zeeman"] + tilt["transverse_zeeman_quadratic"]
        tags = tuple(
            t for t in ("transverse_zeeman", "transverse_zeeman_quadratic") if abs(tilt[t]) > 0.0
        )
    else:
        element = tilt["transverse_double_quantum"]
        tags = ("transverse_double_quantum",) if abs(element) > 0.0 else ()
    return element, tags


def _hyperfine_entry_element(
    system: SpinSystem, family: str, b_cross: float, mixing: PerturbativeMixing
) -> tuple[complex, tuple[str, ...]]:
    tilt = _tilt_elements(system, b_cross)
    element: complex = 0.0
    tags: list[str] = []
    if family == "lc-1a":
        element = mixing.v1
        if abs(element) > 0.0:
            tags.append("hfc_flip_flop")
    elif family == "lc-1d":
        element = mixing.v2
        if abs(element) > 0.0:
            tags.append("hfc_double_flip")
    elif family in ("lc-1b", "lc-1c"):
        for t in ("transverse_zeeman", "transverse_zeeman_quadratic"):
            if abs(tilt[t]) > 0.0:
                element += tilt[t]
                tags.append(t)
    elif family in ("lc-2a", "lc-2d"):
        element = tilt["transverse_double_quantum"]
        if abs(element) > 0.0:
            tags.append("transverse_double_quantum")
    # lc-2b / lc-2c: no first-order element from any implemented perturbation
    return element, tuple(tags)


def _subspace_gap(h: np.ndarray, refs: np.ndarray) -> tuple[float, np.ndarray]:
    """Gap between the two eigenstates best overlapping span(refs)."""
    w, v = np.linalg.eigh(h)
    scores = np.sum(np.abs(refs.conj().T @ v) ** 2, axis=0)
    top = np.argsort(scores)[-2:]
    pair = np.sort(top)
    gap = abs(w[pair[1]] - w[pair[0]])
    return gap, v[:, pair]


def numeric_lac_gap(
    system: SpinSystem,
    state_block: str,
    pair: tuple[int, int],
    b_window: tuple[float, float],
    *,
    points: int = 241,
    refine_tol: float = 1e-9,
) -> tuple[float, float]:
    """Minimal gap of an avoided crossing measured from the full Hamiltonian.

    Scans the window with adiabatic subspace tracking (the tracked pair is
    continued by maximal overlap between adjacent field points, which stays
    stable through the hybridization region), then refines the minimum by
    golden-section search.

    Args:
        system: system description (all perturbations included).
        state_block: "gs" or "es".
        pair: the two energy-branch numbers (1..8) to follow.
        b_window: (b_lo, b_hi) field window in mT; must bracket exactly one
            avoided crossing of the pair.
        points: coarse-scan resolution.
        refine_tol: field tolerance of the refinement, mT.

    Returns:
        (b_min, gap) with b_min in mT and gap in rad/ns.

    Raises:
        NoCrossingInWindow: when the tracked gap is monotonic across the
            window (minimum sits on a window edge).
    """
    lo, hi = b_window
    if not lo < hi:
        raise ValueError("empty field window")

    def hamiltonian(b: float) -> np.ndarray:
        return build_state_hamiltonian(system, state_block, b) + build_perturbation(system, b)

    refs = np.zeros((8, 2), dtype=complex)
    refs[pair[0] - 1, 0] = 1.0
    refs[pair[1] - 1, 1] = 1.0

    bs = np.linspace(lo, hi, points)
    gaps = np.empty(points)
    tracked = refs
    snapshots = []
    for i, b in enumerate(bs):
        gaps[i], tracked = _subspace_gap(hamiltonian(b), tracked)
        snapshots.append(tracked)
    k = int(np.argmin(gaps))
    if k == 0 or k == points - 1:
        raise NoCrossingInWindow(
            f"gap of pair {pair} is monotonic over [{lo}, {hi}] mT (minimum at the edge)"
        )

    ref_min = snapshots[k]

    def gap_at(b: float) -> float:
        return _subspace_gap(hamiltonian(b), ref_min)[0]

    a, c = bs[k - 1], bs[k + 1]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = c - invphi * (c - a)
    x2 = a + invphi * (c - a)
    f1, f2 = gap_at(x1), gap_at(x2)
    while c - a > refine_tol:
        if f1 < f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - invphi * (c - a)
            f1 = gap_at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (c - a)
            f2 = gap_at(x2)
    b_min = 0.5 * (a + c)
    return b_min, gap_at(b_min)
