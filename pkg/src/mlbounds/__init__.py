"""Upper bounds on the ML decoding error probability of binary linear block
codes over the BPSK-AWGN channel, plus a Monte Carlo validation harness.
"""

from .errors import (
    FileFormatError,
    MlboundsError,
    ProviderLookupError,
    ResourceLimitError,
    ValidationError,
)
from .numerics import (
    ChannelPoint,
    SnrConvention,
    TripletGeometry,
    angle_upper_bound,
    binomial_tail,
    q_function,
    triplet_probability,
)
from .spectrum import (
    InputOutputSpectrum,
    LinearCode,
    SpectrumKind,
    WeightSpectrum,
    ensemble_average,
    enumerate_spectrum,
    format_spectrum,
    load_generator,
    load_spectrum,
    macwilliams_transform,
    store_generator,
    store_spectrum,
)
from .simulator import (
    BLOCK,
    ListOutcome,
    SimConfig,
    SimReport,
    TrialOutcome,
    decode_trial,
    list_decode,
    ml_decode,
    simulate,
    wilson_interval,
)
from .bounds import (
    BaseBoundProvider,
    BoundResult,
    BoundVariant,
    FileBoundProvider,
    ThetaPolicy,
    UnionBoundProvider,
    bit_error_bound,
    gfbt_combine,
    h_prime_term,
    h_term,
    optimize_dstar,
    pairwise_error_bound,
    pairwise_term,
    triplet_error_bound,
    triplet_term,
    truncated_union_bound,
    union_bound,
    word_error_bound,
)

__version__ = "0.1.0"
