"""qaoalab: exact statevector laboratory for QAOA phase diagrams.

Builds cost/mixer/initial-state problem instances (molecular Hamiltonians
via Jordan-Wigner, random 3-SAT, fully connected Ising), evolves them under
ramp-scheduled alternating protocols, and maps the squared ground-state
overlap over the (delta, p) plane.
"""

from .errors import (
    CapacityError,
    ConvergenceError,
    FormatError,
    ModeError,
    QaoalabError,
    ShapeError,
    StabilityError,
    SweepError,
    ValidationError,
)
from .fcidump import MolecularIntegrals, parse_fcidump, write_fcidump
from .jordan_wigner import jordan_wigner, jw_ladder, number_operator, sz_operator
from .kernel import (
    GroundManifold,
    apply_diagonal_phase,
    apply_pauli_sum,
    apply_x_mixer,
    continuous_evolve,
    expm_krylov,
    ground_states,
)
from .pauli import DiagonalOperator, PauliString, PauliSum, diagonal_part
from .problems import (
    IsingInstance,
    MixerSpec,
    ProblemInstance,
    SatFormula,
    build_chemistry_problem,
    build_ising_problem,
    build_sat_problem,
    initial_state,
    ising_cost,
    parse_dimacs,
    random_3sat,
    load_instance,
    random_ising,
    sat_cost,
    save_instance,
    write_dimacs,
    x_mixer_spec,
    xy_mixer,
)
from .eigenphase import EigenphaseTrack, step_unitary_eigenphases
from .evolve import (
    QaoaEvolver,
    continuous_evolve_instance,
    instance_ground_manifold,
    qaoa_evolve,
    squared_overlap,
)
from .schedules import AngleSequence, Schedule, schedule_angles
from .statevector import (
    StateVector,
    load_statevector,
    save_statevector,
    sector_indices,
)
from .sweep import (
    GridSpec,
    PhaseDiagram,
    delta_crit,
    export_csv,
    export_json,
    import_csv,
    import_json,
    run_sweep,
)

__version__ = "0.1.0"
