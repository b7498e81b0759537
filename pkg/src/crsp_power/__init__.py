"""Control power of controlled remote state preparation schemes."""

from .tensor import (
    Party,
    PureState,
    DensityOperator,
    Subsystem,
    SystemLayout,
    apply_unitary,
    equatorial_random,
    fidelity,
    generalized_pauli,
    generalized_x_basis,
    haar_random_pure,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    project,
    von_neumann_entropy,
)
from .channels import ChannelSpec
from .protocols import (
    MixerModel,
    StepScript,
    builtin,
    mixer_rho,
    reduce_receiver,
    rsp_basis,
    run_conditioned,
)
from .analysis import (
    PowerReport,
    TargetEnsemble,
    analyze,
    average_ncf_analytic,
    average_ncf_mc,
    classical_limit,
    control_power,
    controller_entropy_audit,
    entropy_table,
    power_bound,
    sweep,
    verdict,
)

__version__ = "0.1.0"
