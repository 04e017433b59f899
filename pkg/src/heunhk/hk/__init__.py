"""Xi, the integral representation, monodromy and the Hermite-Krichever / Bethe forms."""

from .bethe import BetheData, bethe_lambda_g, bethe_roots
from .integral import Continuation, lambda_eval, ode_residual
from .monodromy import HKData, hk_data, hk_decompose, hk_parameters, monodromy_multipliers, period_factor
from .xi import XiFunction, build_xi, q_value
