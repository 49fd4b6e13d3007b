"""Entanglement certification from partial Pauli data via truncated moment
sequences, with statistics of measurement-sequence lengths."""

try:
    # the package works on stacks of small dense matrices; multi-threaded
    # BLAS kernels only add synchronization overhead there
    from threadpoolctl import threadpool_limits as _threadpool_limits

    _threadpool_limits(limits=1, user_api="blas")
except Exception:  # pragma: no cover - threadpoolctl is optional
    pass

from .bloch import (
    BlochTensor,
    SpinSize,
    coherent_tensor,
    density_from_tensor,
    moments_from_tensor,
    tensor_from_density,
    tensor_from_two_qubit_density,
)
from .observables import (
    MeasurementPath,
    MeasurementSet,
    canonical_set,
    effective_moments,
    enumerate_paths,
    enumerate_sets,
    mk_formula,
)
from .sampling import (
    SeededEnsemble,
    ppt_separable_two_qubit,
    quantumness,
    sample_state,
)
from .sdp import SdpProblem, SdpVerdict, solve_feasibility
from .tms import (
    DetectConfig,
    MomentMatrixSpec,
    TmsVerdict,
    build_instance,
    detect,
    detect_full_tomography,
    detect_set,
)
from .witnesses import diag_witness, enumerate_diag, pair_values, t32_matrix

__version__ = "0.1.0"
