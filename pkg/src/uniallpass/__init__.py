"""Delay-network allpass filters that stay allpass for any delay lengths."""

from .complete import (
    AdmissibilityReport,
    SisoCompletionTrace,
    admissibility,
    orthogonal_completion,
    random_orthogonal,
    random_uniallpass,
    select_rank1_roots,
    siso_completion,
)
from .core import (
    AllpassReport,
    TransferSample,
    delay_matrix,
    denominator_poly,
    frequency_response,
    gcp,
    impulse_response,
    is_allpass,
    numerator_poly,
    ordered_subsets,
    poles,
    polyval_zinv,
    principal_minor,
    principal_minor_list,
    stability_certificate,
    transfer_function,
)
from .designs import (
    delay_dependent_allpass,
    gardner_nested,
    poletti_unitary,
    schroeder_series,
)
from .errors import (
    CompletionError,
    ConditioningError,
    FdnError,
    InterleavingError,
    NotCertifiableError,
    PoleEvaluationError,
    SchemaError,
    UnstableError,
)
from .homogeneous import (
    HomogeneousDesign,
    cauchy_unitary,
    choose_dsim,
    decay_gains,
    design_homogeneous_siso,
    validate_interleaving,
)
from .system import DelayVector, FdnSystem, SystemMatrix
from .verify import (
    MinorCheck,
    SchurPair,
    UniallpassCertificate,
    apply_diagonal_similarity,
    balanced_form,
    balanced_residuals,
    certify_uniallpass,
    check_minor_condition,
    dsim_from_hadamard_quotient,
    dsim_from_lyapunov,
    lyapunov_gram,
    schur_complements,
)

__version__ = "0.1.0"
