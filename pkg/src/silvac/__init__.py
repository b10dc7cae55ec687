"""Steady-state Lindblad modeling of optically pumped spin-3/2 defect centers.

The package computes photoluminescence, ODMR spectra and level-(anti)crossing
structure for a quartet electron spin coupled to one spin-1/2 nucleus, driven
through a ground state / excited state / metastable-shelf optical cycle.
"""

from .hamiltonians import (
    BlockHamiltonian,
    FieldConfig,
    SpinSystem,
    build_lab_hamiltonian,
    build_odmr_hamiltonian,
    build_perturbation,
    build_rotating_frame_hamiltonian,
    build_state_hamiltonian,
    vsi_system,
)
from .kinetics import (
    JumpOperatorSet,
    Liouvillian,
    RateScheme,
    assemble_liouvillian,
    build_jump_operators,
    dissipator_superoperator,
    hamiltonian_superoperator,
    vsi_rates,
)
from .lc_atlas import (
    BRANCH_STATES,
    DegenerateGamma,
    LC_PAIRS,
    LcCatalogEntry,
    MisalignmentElement,
    NoCrossingInWindow,
    PerturbativeMixing,
    VanishingDenominator,
    analytic_energies,
    build_catalog,
    first_order_mixing,
    lc_positions,
    misalignment_elements,
    numeric_lac_gap,
    second_order_lc2_elements,
)
from .observables import (
    LcAnnotation,
    RelativeOdmr,
    SweepResult,
    SweepSpec,
    odmr_field_sweep,
    odmr_frequency_sweep,
    pl_derivative_sweep,
    pl_field_sweep,
    pl_intensity,
    relative_odmr,
)
from .spin_algebra import (
    SpinOperatorSet,
    basis_labels,
    build_spin_operators,
    embed_electronic,
    kron,
    projector,
)
from .steady_state import (
    BlockDensityMatrix,
    SingularSystem,
    StepTooLarge,
    propagate,
    solve_steady_state,
)

__version__ = "0.1.0"

__all__ = [
    "BRANCH_STATES",
    "BlockDensityMatrix",
    "BlockHamiltonian",
    "DegenerateGamma",
    "FieldConfig",
    "JumpOperatorSet",
    "LC_PAIRS",
    "LcAnnotation",
    "LcCatalogEntry",
    "Liouvillian",
    "MisalignmentElement",
    "NoCrossingInWindow",
    "PerturbativeMixing",
    "RateScheme",
    "RelativeOdmr",
    "SingularSystem",
    "SpinOperatorSet",
    "SpinSystem",
    "StepTooLarge",
    "SweepResult",
    "SweepSpec",
    "VanishingDenominator",
    "analytic_energies",
    "assemble_liouvillian",
    "basis_labels",
    "build_catalog",
    "build_jump_operators",
    "build_lab_hamiltonian",
    "build_odmr_hamiltonian",
    "build_perturbation",
    "build_rotating_frame_hamiltonian",
    "build_spin_operators",
    "build_state_hamiltonian",
    "dissipator_superoperator",
    "embed_electronic",
    "first_order_mixing",
    "hamiltonian_superoperator",
    "kron",
    "lc_positions",
    "misalignment_elements",
    "numeric_lac_gap",
    "odmr_field_sweep",
    "odmr_frequency_sweep",
    "pl_derivative_sweep",
    "pl_field_sweep",
    "pl_intensity",
    "projector",
    "propagate",
    "relative_odmr",
    "second_order_lc2_elements",
    "solve_steady_state",
    "vsi_rates",
    "vsi_system",
]
