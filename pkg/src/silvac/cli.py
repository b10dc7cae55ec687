"""Command-line front end: config files, sweep orchestration, CSV output.

Subcommands
-----------
pl-sweep        steady-state PL versus static field
pl-derivative   lock-in style dPL/dB versus static field
odmr-freq       ODMR contrast versus drive frequency at fixed field
odmr-field      ODMR contrast versus static field at fixed drive frequency
lc-atlas        analytic crossing catalog, mixing elements and measured gaps
validate        invariant suite on the configured system

Configs are TOML with explicit units in the key names; unknown keys are
rejected so a typo cannot silently fall back to a default.  Every CSV embeds
the fully resolved config between ``# config-begin`` / ``# config-end``
marker lines, so an output file can be fed back in as a config and will
reproduce itself byte for byte.

Exit codes: 0 success, 1 config error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import units
from .hamiltonians import (
    FieldConfig,
    SpinSystem,
    build_lab_hamiltonian,
    build_odmr_hamiltonian,
    vsi_system,
)
from .kinetics import (
    RateScheme,
    assemble_liouvillian,
    build_jump_operators,
    vsi_rates,
)
from .lc_atlas import (
    DegenerateGamma,
    NoCrossingInWindow,
    VanishingDenominator,
    analytic_energies,
    build_catalog,
    numeric_lac_gap,
)
from .observables import (
    SweepResult,
    SweepSpec,
    odmr_field_sweep,
    odmr_frequency_sweep,
    pl_derivative_sweep,
    pl_field_sweep,
)
from .spin_algebra import ES, GS, basis_labels
from .steady_state import (
    BlockDensityMatrix,
    SingularSystem,
    StepTooLarge,
    propagate,
    solve_steady_state,
)

__version__ = "0.1.0"

SUBCOMMANDS = ("pl-sweep", "pl-derivative", "odmr-freq", "odmr-field", "lc-atlas", "validate")


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved, seed-free run description."""

    system: SpinSystem
    rates: RateScheme
    sweep: SweepSpec
    swap_isc_branching: bool = False
    perturbations_in_odmr: bool = False
    gap_window: float = 0.35
    gap_points: int = 281
    out: str | None = None


_SWEEP_DEFAULTS: dict[str, dict] = {
    "pl-sweep": dict(
        variable="field_mT", start=0.0, stop=20.0, points=1000,
        b_fixed_mT=0.0, b1_mT=0.1, rf_frequency_MHz=2.0,
        derivative_step=0.02, normalization="none", normalization_windows=(),
    ),
    "pl-derivative": dict(
        variable="field_mT", start=0.0, stop=20.0, points=1000,
        b_fixed_mT=0.0, b1_mT=0.1, rf_frequency_MHz=2.0,
        derivative_step=0.02, normalization="none", normalization_windows=(),
    ),
    "odmr-freq": dict(
        variable="rf_frequency_MHz", start=10.0, stop=500.0, points=491,
        b_fixed_mT=0.0, b1_mT=0.1, rf_frequency_MHz=2.0,
        derivative_step=0.02, normalization="per_transition",
        normalization_windows=((30.0, 110.0), (330.0, 490.0)),
    ),
    "odmr-field": dict(
        variable="field_mT", start=0.0, stop=16.0, points=801,
        b_fixed_mT=0.0, b1_mT=0.1, rf_frequency_MHz=2.0,
        derivative_step=0.02, normalization="max_abs", normalization_windows=(),
    ),
}
# catalog/validate runs reuse the plain field-sweep defaults
_SWEEP_DEFAULTS["lc-atlas"] = _SWEEP_DEFAULTS["pl-sweep"]
_SWEEP_DEFAULTS["validate"] = _SWEEP_DEFAULTS["pl-sweep"]

_SYSTEM_KEYS = {
    "d_gs_mT": "d_gs",
    "d_es_mT": "d_es",
    "g_par_1": "g_par_1",
    "g_par_2": "g_par_2",
    "g_par_3": "g_par_3",
    "g_perp_1": "g_perp_1",
    "g_perp_2": "g_perp_2",
    "g_perp_3": "g_perp_3",
    "hfc_gs_mT": "hfc_gs",
    "hfc_es_mT": "hfc_es",
    "gamma_n_over_gamma_e": "gamma_n_over_gamma_e",
    "theta_rad": "theta",
}
_RATE_KEYS = ("pump_i", "k1_fl", "k2_fl", "k1_isc", "k2_isc", "kprime_isc")
_SWEEP_KEYS = set(_SWEEP_DEFAULTS["pl-sweep"])
_TOGGLE_KEYS = ("swap_isc_branching", "perturbations_in_odmr")
_ATLAS_KEYS = ("gap_window_mT", "gap_points")
_TOP_KEYS = {"out", "system", "rates_per_ns", "sweep", "toggles", "atlas"}


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _build_system(section: dict) -> SpinSystem:
    _reject_unknown(section, _SYSTEM_KEYS, "[system]")
    kwargs = {}
    for key, attr in _SYSTEM_KEYS.items():
        if key not in section:
            continue
        value = section[key]
        if attr in ("hfc_gs", "hfc_es"):
            value = np.asarray(value, dtype=float)
        kwargs[attr] = value
    base = vsi_system()
    merged = {
        attr: kwargs.get(attr, getattr(base, attr))
        for attr in _SYSTEM_KEYS.values()
    }
    try:
        return SpinSystem(**merged)
    except ValueError as err:
        raise ConfigError(f"invalid [system]: {err}") from err


def _build_rates(section: dict) -> RateScheme:
    _reject_unknown(section, _RATE_KEYS, "[rates_per_ns]")
    base = vsi_rates()
    merged = {k: float(section.get(k, getattr(base, k))) for k in _RATE_KEYS}
    try:
        return RateScheme(**merged)
    except ValueError as err:
        raise ConfigError(f"invalid [rates_per_ns]: {err}") from err


def _build_sweep(section: dict, subcommand: str, rf_on: bool) -> SweepSpec:
    _reject_unknown(section, _SWEEP_KEYS, "[sweep]")
    merged = dict(_SWEEP_DEFAULTS[subcommand])
    merged.update(section)
    try:
        fixed = FieldConfig(
            b=float(merged["b_fixed_mT"]),
            b1=float(merged["b1_mT"]),
            omega_rf=units.mhz_to_rad_per_ns(float(merged["rf_frequency_MHz"])),
            rf_on=rf_on,
        )
        return SweepSpec(
            variable=str(merged["variable"]),
            start=float(merged["start"]),
            stop=float(merged["stop"]),
            points=int(merged["points"]),
            fixed=fixed,
            derivative_step=float(merged["derivative_step"]),
            normalization=str(merged["normalization"]),
            normalization_windows=tuple(
                (float(lo), float(hi)) for lo, hi in merged["normalization_windows"]
            ),
        )
    except (ValueError, TypeError, KeyError) as err:
        raise ConfigError(f"invalid [sweep]: {err}") from err


def load_config(path: str | Path | None, subcommand: str) -> RunConfig:
    """Parse a TOML config (or build the subcommand's defaults when None)."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    raw: dict = {}
    if path is not None:
        try:
            raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"cannot parse config {path}: {err}") from err
    _reject_unknown(raw, _TOP_KEYS, "the top level")

    toggles = raw.get("toggles", {})
    _reject_unknown(toggles, _TOGGLE_KEYS, "[toggles]")
    atlas = raw.get("atlas", {})
    _reject_unknown(atlas, _ATLAS_KEYS, "[atlas]")

    for name in _TOGGLE_KEYS:
        if name in toggles and not isinstance(toggles[name], bool):
            raise ConfigError(f"[toggles] {name} must be a boolean")

    rf_on = subcommand in ("odmr-freq", "odmr-field")
    sweep_section = raw.get("sweep", {})
    if "variable" in sweep_section and sweep_section["variable"] != _SWEEP_DEFAULTS[subcommand]["variable"]:
        raise ConfigError(
            f"[sweep] variable {sweep_section['variable']!r} does not match "
            f"subcommand {subcommand} ({_SWEEP_DEFAULTS[subcommand]['variable']})"
        )

    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("top-level 'out' must be a string path")

    return RunConfig(
        system=_build_system(raw.get("system", {})),
        rates=_build_rates(raw.get("rates_per_ns", {})),
        sweep=_build_sweep(sweep_section, subcommand, rf_on),
        swap_isc_branching=bool(toggles.get("swap_isc_branching", False)),
        perturbations_in_odmr=bool(toggles.get("perturbations_in_odmr", False)),
        gap_window=float(atlas.get("gap_window_mT", 0.35)),
        gap_points=int(atlas.get("gap_points", 281)),
        out=out,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return repr(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {value!r}")


def _fmt_matrix(t: np.ndarray) -> str:
    rows = (", ".join(_fmt(x) for x in row) for row in np.asarray(t, dtype=float))
    return "[" + ", ".join(f"[{row}]" for row in rows) + "]"


def config_to_toml(config: RunConfig) -> str:
    """Deterministic TOML serialization of a fully resolved config."""
    s = config.system
    sw = config.sweep
    windows = ", ".join(f"[{_fmt(lo)}, {_fmt(hi)}]" for lo, hi in sw.normalization_windows)
    lines = [
        "[system]",
        f"d_gs_mT = {_fmt(s.d_gs)}",
        f"d_es_mT = {_fmt(s.d_es)}",
        f"g_par_1 = {_fmt(s.g_par_1)}",
        f"g_par_2 = {_fmt(s.g_par_2)}",
        f"g_par_3 = {_fmt(s.g_par_3)}",
        f"g_perp_1 = {_fmt(s.g_perp_1)}",
        f"g_perp_2 = {_fmt(s.g_perp_2)}",
        f"g_perp_3 = {_fmt(s.g_perp_3)}",
        f"hfc_gs_mT = {_fmt_matrix(s.hfc_gs)}",
        f"hfc_es_mT = {_fmt_matrix(s.hfc_es)}",
        f"gamma_n_over_gamma_e = {_fmt(s.gamma_n_over_gamma_e)}",
        f"theta_rad = {_fmt(s.theta)}",
        "",
        "[rates_per_ns]",
        *(f"{k} = {_fmt(getattr(config.rates, k))}" for k in _RATE_KEYS),
        "",
        "[sweep]",
        f"variable = {_fmt(sw.variable)}",
        f"start = {_fmt(sw.start)}",
        f"stop = {_fmt(sw.stop)}",
        f"points = {_fmt(sw.points)}",
        f"b_fixed_mT = {_fmt(sw.fixed.b)}",
        f"b1_mT = {_fmt(sw.fixed.b1)}",
        f"rf_frequency_MHz = {_fmt(units.rad_per_ns_to_mhz(sw.fixed.omega_rf))}",
        f"derivative_step = {_fmt(sw.derivative_step)}",
        f"normalization = {_fmt(sw.normalization)}",
        f"normalization_windows = [{windows}]",
        "",
        "[toggles]",
        f"swap_isc_branching = {_fmt(config.swap_isc_branching)}",
        f"perturbations_in_odmr = {_fmt(config.perturbations_in_odmr)}",
        "",
        "[atlas]",
        f"gap_window_mT = {_fmt(config.gap_window)}",
        f"gap_points = {_fmt(config.gap_points)}",
    ]
    return "\n".join(lines) + "\n"


def config_from_output(path: str | Path, subcommand: str) -> RunConfig:
    """Recover the embedded config from a CSV written by this tool."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        lo = lines.index("# config-begin") + 1
        hi = lines.index("# config-end")
    except ValueError as err:
        raise ConfigError(f"{path} carries no embedded config") from err
    toml_text = "\n".join(line[2:] for line in lines[lo:hi])
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".toml", delete=False) as fh:
        fh.write(toml_text)
        tmp = fh.name
    try:
        return load_config(tmp, subcommand)
    finally:
        Path(tmp).unlink(missing_ok=True)


def _manifest_lines(subcommand: str, config: RunConfig, diagnostics: dict) -> list[str]:
    lines = [
        f"# silvac {__version__}",
        f"# subcommand: {subcommand}",
        f"# diagnostics: {json.dumps(diagnostics, sort_keys=True)}",
        "# config-begin",
    ]
    lines += [f"# {line}" if line else "#" for line in config_to_toml(config).splitlines()]
    lines += ["# config-end"]
    return lines


def _echo_manifest(subcommand: str, config: RunConfig, out: Path, diagnostics: dict) -> None:
    manifest = {
        "tool": "silvac",
        "version": __version__,
        "subcommand": subcommand,
        "out": str(out),
        "diagnostics": diagnostics,
    }
    print(json.dumps(manifest, sort_keys=True))


def _write_csv(path: Path, header_lines: list[str], columns: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return repr(int(value))
    f = float(value)
    return repr(f)


def _write_sweep_csv(path: Path, subcommand: str, config: RunConfig, result: SweepResult) -> None:
    columns = [result.spec.variable, "raw", "normalized", "nearest_lc", "lc_offset"]
    rows = []
    for x, raw, value in zip(result.abscissa, result.raw, result.values):
        near = result.nearest_annotation(float(x))
        name, offset = near if near is not None else ("", math.nan)
        rows.append([_cell(float(x)), _cell(raw), _cell(value), name, _cell(offset)])
    _write_csv(path, _manifest_lines(subcommand, config, result.diagnostics), columns, rows)


def _run_sweep(subcommand: str, config: RunConfig, out: Path, threads: int) -> int:
    kwargs = dict(swap_isc_branching=config.swap_isc_branching, threads=threads)
    if subcommand == "pl-sweep":
        result = pl_field_sweep(config.system, config.rates, config.sweep, **kwargs)
    elif subcommand == "pl-derivative":
        result = pl_derivative_sweep(config.system, config.rates, config.sweep, **kwargs)
    elif subcommand == "odmr-freq":
        result = odmr_frequency_sweep(
            config.system, config.rates, config.sweep,
            perturbations_in_odmr=config.perturbations_in_odmr, **kwargs,
        )
    else:
        result = odmr_field_sweep(
            config.system, config.rates, config.sweep,
            perturbations_in_odmr=config.perturbations_in_odmr, **kwargs,
        )
    _write_sweep_csv(out, subcommand, config, result)
    _echo_manifest(subcommand, config, out, result.diagnostics)
    return 0


def _run_atlas(config: RunConfig, out: Path) -> int:
    entries = build_catalog(config.system)
    columns = [
        "state_block", "family", "b_cross_mT", "branch_lo", "branch_hi", "pair",
        "nuclear_flip", "element_real_radns", "element_imag_radns", "element_abs_mT",
        "element_abs_MHz", "second_order_radns", "lifted_by",
        "gap_b_min_mT", "gap_radns", "gap_over_two_elements",
    ]
    rows = []
    for e in entries:
        coupling = complex(e.mixing_element) + complex(e.second_order_element)
        gap_b, gap, ratio = math.nan, math.nan, math.nan
        if abs(coupling) > 1e-15 and e.branches is not None:
            window = (e.b_cross - config.gap_window, e.b_cross + config.gap_window)
            try:
                gap_b, gap = numeric_lac_gap(
                    config.system, e.state_block, e.branches, window, points=config.gap_points
                )
                ratio = gap / (2.0 * abs(coupling))
            except NoCrossingInWindow:
                pass
        rows.append([
            e.state_block,
            e.family,
            _cell(e.b_cross),
            "" if e.branches is None else _cell(e.branches[0]),
            "" if e.branches is None else _cell(e.branches[1]),
            "|".join(e.pair_labels),
            _cell(int(e.nuclear_flip)),
            _cell(e.mixing_element.real if isinstance(e.mixing_element, complex) else e.mixing_element),
            _cell(e.mixing_element.imag if isinstance(e.mixing_element, complex) else 0.0),
            _cell(e.element_mt),
            _cell(e.element_mhz),
            _cell(e.second_order_element),
            ";".join(e.lifted_by),
            _cell(gap_b),
            _cell(gap),
            _cell(ratio),
        ])
    diagnostics = {"entries": len(entries)}
    _write_csv(out, _manifest_lines("lc-atlas", config, diagnostics), columns, rows)
    _echo_manifest("lc-atlas", config, out, diagnostics)
    return 0


def _validate_checks(config: RunConfig) -> list[tuple[str, float, float, bool]]:
    """Invariant suite: (name, value, threshold, passed) per check.

    Thresholds are upper bounds on the reported value (absolute errors or
    defect norms), so value <= threshold means pass.
    """
    system, rates = config.system, config.rates
    jumps = build_jump_operators(rates, swap_isc_branching=config.swap_isc_branching)
    fields = (0.5, 2.5, 7.5)
    checks: list[tuple[str, float, float, bool]] = []

    def add(name: str, value: float, threshold: float) -> None:
        checks.append((name, value, threshold, bool(value <= threshold)))

    herm = 0.0
    trace_leak = 0.0
    residual = 0.0
    trace_err = 0.0
    state_herm = 0.0
    min_eig = 0.0
    rho_last = None
    l_last = None
    for b in fields:
        h = build_lab_hamiltonian(system, b)
        full = h.full()
        herm = max(herm, float(np.max(np.abs(full - full.conj().T))))
        l = assemble_liouvillian(h, jumps)
        n = l.dim
        trace_vec = np.zeros(n * n, dtype=complex)
        trace_vec[:: n + 1] = 1.0
        trace_leak = max(trace_leak, float(np.max(np.abs(trace_vec @ l.matrix))))
        rho = solve_steady_state(l)
        vec = rho.matrix.flatten(order="F")
        residual = max(residual, float(np.max(np.abs(l.matrix @ vec))))
        trace_err = max(trace_err, abs(rho.trace() - 1.0))
        state_herm = max(state_herm, rho.hermiticity_defect())
        min_eig = min(min_eig, rho.min_eigenvalue())
        rho_last, l_last = rho, l
    add("hamiltonian_hermitian", herm, 1e-12)
    add("liouvillian_trace_preserving", trace_leak, 1e-12)
    add("steady_state_residual", residual, 1e-10)
    add("steady_state_trace_error", trace_err, 1e-10)
    add("steady_state_hermiticity", state_herm, 1e-10)
    add("steady_state_negative_eigenvalue", max(0.0, -min_eig), 1e-8)

    # analytic crossings must zero the secular energy differences
    worst = 0.0
    for e in build_catalog(system):
        if e.branches is None:
            continue
        d = system.zfs(e.state_block)
        azz = float(system.hfc(e.state_block)[2, 2])
        energies = analytic_energies(d, e.b_cross, azz, system.gamma_n_over_gamma_e,
                                     gamma_e=system.gamma_e)
        worst = max(worst, abs(energies[e.branches[0] - 1] - energies[e.branches[1] - 1]))
    add("catalog_degeneracy", worst, 1e-12)

    # the steady state must be a fixed point of the independent propagator
    if rho_last is not None and l_last is not None:
        dt = 0.09 / max(float(np.linalg.norm(l_last.matrix, np.inf)), 1e-30)
        drift = propagate(l_last, rho_last, 20.0, dt)
        moved = float(np.max(np.abs(drift.matrix - rho_last.matrix)))
        add("propagation_fixed_point", moved, 1e-8)
        add("propagation_trace_conserving", abs(drift.trace() - 1.0), 1e-12)

    return checks


def _run_validate(config: RunConfig, out: Path) -> int:
    checks = _validate_checks(config)
    columns = ["check", "value", "threshold", "status"]
    rows = [
        [name, _cell(value), _cell(threshold), "pass" if ok else "fail"]
        for name, value, threshold, ok in checks
    ]
    failed = [name for name, _, _, ok in checks if not ok]
    diagnostics = {"checks": len(checks), "failed": failed}
    _write_csv(out, _manifest_lines("validate", config, diagnostics), columns, rows)
    _echo_manifest("validate", config, out, diagnostics)
    return 2 if failed else 0


def run(subcommand: str, config: RunConfig, *, out: Path, threads: int = 1) -> int:
    """Execute one subcommand against a resolved config; returns the exit code."""
    if subcommand in ("pl-sweep", "pl-derivative", "odmr-freq", "odmr-field"):
        return _run_sweep(subcommand, config, out, threads)
    if subcommand == "lc-atlas":
        return _run_atlas(config, out)
    if subcommand == "validate":
        return _run_validate(config, out)
    raise ConfigError(f"unknown subcommand {subcommand!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise ConfigError(message)


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config file")
    common.add_argument("--out", metavar="PATH", help="output CSV path")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="parallel workers (output is identical for any value)")
    common.add_argument("--normalize", choices=("none", "max_abs", "per_transition"),
                        help="override the sweep normalization mode")
    parser = _Parser(prog="silvac",
                     description="steady-state PL / ODMR / level-crossing calculator")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = load_config(args.config, args.subcommand)
        if args.normalize:
            config = replace(config, sweep=replace(config.sweep, normalization=args.normalize))
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Path(args.out or config.out or args.subcommand.replace("-", "_") + ".csv")
        return run(args.subcommand, config, out=out, threads=args.threads)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (SingularSystem, StepTooLarge, DegenerateGamma, VanishingDenominator,
            NoCrossingInWindow, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
