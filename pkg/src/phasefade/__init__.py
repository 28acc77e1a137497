"""SNR degradation from oscillator phase noise and Rayleigh fading in high-frequency links."""

__version__ = "0.1.0"

from .scenario import (  # noqa: E402
    LinkScenario,
    OscillatorSpec,
    TechnologyParams,
    builtin_technology,
    doppler_frequency,
    load_scenario,
)
from .oscillator import (  # noqa: E402
    innovation_variance,
    kappa_from_ssb_point,
    lorentzian_ssb,
    technology_floor_variance,
    wiener_sample_path,
)
from .fading import ClarkeParams, bessel_j0, clarke_sample_path, correlation_matrix  # noqa: E402
from .bounds import (  # noqa: E402
    bim_channel,
    bim_phase,
    ch_error_variances,
    pn_error_variances,
    wiener_prior_covariance,
)
from .snr import (  # noqa: E402
    block_snr_channel,
    block_snr_phase,
    snr_after_ch_compensation,
    snr_after_pn_compensation,
)
