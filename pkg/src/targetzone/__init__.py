"""FX option pricing inside a target zone with attainable reflecting
boundaries: eigen-series pricing, closed-form models, hedging, Robin
transition kernels and an independent Monte Carlo oracle."""

from .bands import Band, FxBand
from .errors import NumericalError, OutOfBandError, ValidationError
from .models import (
    CosModel,
    CustomModel,
    QuarticModel,
    TanModel,
    ZoneModel,
    build_cos_model,
    build_custom_model,
    build_quartic_model,
    build_tan_model,
    fit_cos_band,
    fit_tan_band,
    fx_invert,
    local_vol,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    short_rate,
    uip_rate,
)
from .eigen import (
    EigenSystem,
    cos_system,
    ground_state,
    numeric_system,
    tan_lambda,
    tan_system,
)
from .pricing import (
    Claim,
    CoefficientSet,
    PriceResult,
    binary_price,
    bond_price,
    call_price,
    claim_coefficients,
    coeffs_call_cos,
    coeffs_call_tan,
    coeffs_bond,
    coeffs_forward,
    coeffs_generic,
    forward_price,
    price,
    price_series,
    put_price,
)
from .hedging import HedgeState, bond_holding, delta, hedge_state
from .mc import (
    McConfig,
    McEstimate,
    mc_price,
    replicate,
    replicate_sweep,
    sample_terminal,
    simulate_path,
)
from .robin import MartingaleReport, RobinDensityParams, density, martingale_checks

__version__ = "0.1.0"
