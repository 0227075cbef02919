"""Amplitude-damping geometry on the Bloch sphere and Haar-convergence
experiments for noisy random H/T/CNOT circuits.

The package splits into five layers:

- `bloch`: the renormalized one-qubit damping map, its Jacobian, the local
  area-expansion factor and the contracting/expanding boundary angle.
- `states`: dense n-qubit pure states and density matrices, the H/T/CNOT
  gates and the amplitude-damping Kraus channel.
- `circuits`: seeded random circuit sampling and paired noiseless/noisy
  ensemble evolution with damping on idle qubits.
- `majorization`: sorted-cumulant SDL signatures, Haar-state sampling and
  the scalar distance-to-Haar diagnostic.
- `experiment` / `service` / `cli`: configuration, deterministic parallel
  orchestration, file output, and the HTTP facade with its thin client.
"""

from .bloch import (
    BlochVector,
    DampingParameter,
    ExpansionProfile,
    PurePoint,
    ad_affine,
    angles_from_bloch,
    bloch_from_angles,
    dtheta_dtheta,
    expansion_exists,
    expansion_profile,
    f_gamma,
    intermediate_norm,
    lambda_factor,
    lambda_north,
    lambda_south,
    purity,
    renormalize,
    theta_c,
)
from .circuits import (
    CircuitRealization,
    LayerEvent,
    NoiseSpec,
    PairedSample,
    derive_seed,
    evolve_noisy,
    evolve_unitary,
    idle_qubits,
    noisy_prob_trajectory,
    paired_ensemble,
    sample_realization,
    unitary_prob_trajectory,
)
from .errors import (
    ControlEqualsTargetError,
    DimensionMismatchError,
    EmptyEnsembleError,
    IndexOutOfRangeError,
    NotAProbabilityVectorError,
    QdampError,
    TooFewQubitsError,
    UndefinedPointError,
    ZeroNormError,
)
from .experiment import (
    DEFAULT_GAMMAS,
    DEFAULT_MASTER_SEED,
    ConvergenceResult,
    ExperimentConfig,
    GeometryResult,
    config_hash,
    recorded_depths,
    run_convergence,
    run_geometry,
    validate_and_echo,
    write_convergence_outputs,
    write_geometry_outputs,
)
from .majorization import (
    HaarReference,
    MomentAccumulator,
    SDLSignature,
    cumulants,
    cumulants_batch,
    distance_to_haar,
    ensemble_sdl,
    haar_reference,
    haar_state,
)
from .states import (
    DensityMatrix,
    Gate,
    KrausPair,
    PureState,
    apply_gate,
    apply_kraus_single,
    bloch_vector_of,
    cnot,
    density_from_bloch,
    density_from_pure,
    diag_probs,
    hadamard,
    initial_state,
    kraus_amplitude_damping,
    t_gate,
)

__version__ = "0.1.0"
