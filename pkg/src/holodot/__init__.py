"""Non-adiabatic holonomic gates on triple-quantum-dot charge qubits."""

from .errors import (
    ConfigurationError,
    CyclicityError,
    DecompositionError,
    DegenerateParameterError,
    HolodotError,
    InfeasibleError,
    IntegrationError,
    NumericalError,
    ProtocolError,
)
from .holonomy import (
    GateReport,
    SubspaceEvolution,
    compose_loops,
    evolve_subspace,
    extract_holonomy,
    gauge_transform_check,
    single_qubit_gate,
    synthesize_single_qubit,
)
from .model import (
    DotNetwork,
    LambdaParams,
    PulseEnvelope,
    TwoQubitParams,
    build_lambda_hamiltonian,
    build_ring_hamiltonian,
    build_twoqubit_hamiltonian,
)
from .noise import FidelityCurve, NoiseSpec, evolve_density, fidelity_curve, gate_fidelity
from .propagate import (
    IntegratorConfig,
    PropagatorResult,
    evolve,
    evolve_bruteforce,
    square_pulse_propagator,
)
from .twoqubit import (
    EntanglingGateReport,
    PulseSchedule,
    assemble_gate,
    concurrence_of,
    solve_for_entangling_power,
    solve_schedule,
    sweep_concurrence,
)

__version__ = "0.1.0"
