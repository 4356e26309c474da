from .checks import (
    FisherInformation,
    QuantumMoments,
    QuantumReport,
    analyse,
    commutator_check,
    commutator_residual,
    fisher_info,
    fisher_information,
    hbound_check,
    hup_check,
    mech_cov,
    moments,
    momentum_variance_check,
    p_hat,
    stam_and_cr_check,
    x_hat,
)
from .wavefunction import (
    HBAR_SI,
    MomentumRepresentation,
    WaveFunction,
    battery_states,
    build_state,
    gaussian,
    inverse_transform,
    momentum_transform,
    normalize,
    superposition,
)
from .wigner import WignerGrid, WignerSummary, wigner, wigner_compare, wigner_p_grid, wigner_summary
