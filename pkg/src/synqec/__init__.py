"""Noise-adapted quantum error correction toolkit.

Implements Kraus-operator subspace orthogonalization, the syndrome-based
Petz recovery and its companions (transpose channel, polar recovery,
single-damping recovery, stabilizer lookup), fidelity measures with
polynomial fits, and multicycle logical-lifetime experiments.
"""

from .channels import (
    KrausChannel,
    PauliString,
    amplitude_damping,
    apply,
    compose,
    damping_channel,
    depolarizing,
    gamma_from_delay,
    n_fold_product,
)
from .codes import (
    QuantumCode,
    StabilizerGroup,
    biconvex_code,
    encoding_unitary,
    leung_code,
    leung_encoder,
    leung_truth_table,
    load_code,
    six_qubit_code_group,
    stabilizer_codespace,
)
from .metrics import (
    FidelityReport,
    entanglement_fidelity,
    fidelity_poly_fit,
    logical_readout_fidelity,
    petz_entanglement_fidelity,
    polar_bound_diagnostic,
    theorem2_certificate,
    worst_case_fidelity,
)
from .ortho import (
    OrthogonalizedNoise,
    as_channel,
    biconvex_damping_orders,
    leung_damping_order,
    logical_zero_override,
    orthogonalize,
    six_qubit_correctable_set,
    weight_order,
)
from .recovery import (
    QecMatrix,
    RecoveryMap,
    SyndromeTable,
    apply_recovery,
    leung_recovery,
    optimality_check,
    petz,
    polar_recovery,
    qec_matrix,
    stabilizer_lookup_recovery,
    syndrome_petz,
    syndrome_table,
)
from .experiments import (
    LifetimeFit,
    MulticycleConfig,
    bare_qubit_curve,
    exp_fit,
    run_multicycle,
)

__version__ = "0.1.0"
