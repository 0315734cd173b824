"""Agile-AFDM: per-block chirp-parameter optimization for AFDM waveforms.

The package provides the unitary chirp transform pair, doubly-dispersive
channel construction in the chirp transform domain, three per-block
optimizers (envelope peak reduction, interference suppression, estimation
bound minimization), classic PAPR-reduction baselines, and a seeded Monte
Carlo experiment harness with CSV / JSON / figure output.
"""

from .daft import ChirpParams, idaft, daft, append_cpp, oversampled_envelope
from .channel import (
    ChannelPath,
    PathSet,
    SensingTarget,
    kernel_alignment,
    effective_comm_channel,
    effective_sens_channel,
    ici_decompose,
)
from .papr import (
    PaprSearchConfig,
    papr_db,
    envelope_coefficients,
    quartic_trig_integral,
    surrogate_derivative,
    optimize_papr_c2,
)
from .baselines import BaselineConfig, ofdm_papr, clip, slm, pts
from .sir import SirObjective, SirOptConfig, sir, update_auxiliary, fp_surrogate, numerical_gradient, optimize_sir, static_afdm_sir_baseline
from .crlb import (
    FimSummary,
    UnidentifiableError,
    reference_signal,
    fim_summary,
    crlb,
    crlb_ideal,
    sensitivity_rv_cv,
)
from .pso import PsoConfig, pso_minimize

__version__ = "0.1.0"
