"""Schrodinger evolution with complex absorbing potentials, classically and as a dilation circuit."""

from .analysis import gate_count_table, observable_expectation, verify_trotter_bound
from .circuit import (
    Circuit,
    Gate,
    GateKind,
    StateVector,
    apply_gate,
    circuit_unitary,
    inverse_qft_circuit,
    kinetic_phase_circuit,
    potential_phase_block,
    qft_circuit,
)
from .classical import (
    dense_propagator,
    evolve_classical,
    kinetic_spectral_norm,
    split_step,
    trotter_error_bound,
)
from .dilation import (
    angle_transform,
    dilation_angles,
    dilation_unitary,
    multiplexed_ry_circuit,
    turro_dilation,
)
from .evolution import RunConfig, project_ancilla_zero, run_exact, run_sampled, trotter_block
from .grid import Grid, PotentialField, WaveFunction, cap_potential, gaussian_packet, gaussian_well, make_grid, norm

__version__ = "0.1.0"
