"""DOA estimation with mixed high-/low-resolution ADC uniform linear arrays."""

from .array_model import (
    ArrayGeometry,
    SnapshotMatrix,
    SourceScene,
    steering_derivative,
    steering_matrix,
    steering_vector,
    synthesize_snapshots,
)
from .covariance import (
    CovarianceMatrix,
    condition_number_ideal,
    error_term,
    ideal_covariance,
    sample_covariance,
    theoretical_covariance,
)
from .crlb import (
    CrlbReport,
    crlb_appendix,
    crlb_closed_form,
    fim,
    fim_intermediates,
    fim_numeric,
    perf_loss,
    perf_loss_asymptotic,
    perf_loss_formula,
)
from .energy import PowerModel, adc_power, energy_efficiency, optimal_bits, total_power
from .estimators import DoaEstimate, decompose, find_peaks, music, music_spectrum, root_music
from .quantizer import (
    INFINITE_RESOLUTION,
    MixedAdcConfig,
    aqnm_observe,
    distortion_factor,
    lloydmax_codebook,
    quantization_noise_cov,
    quantize_true,
)

__version__ = "0.1.0"
