from .errors import MultipolyError, MalformedInput, UnsupportedField, BudgetExceeded, RecoveryFailure
from .engine import Engine, EngineState, get_engine
from .mpcore import (
    Field, MultiIndex, MultiDegree, CoefficientKey, MultiPolynomial, FiniteTypeSpec,
    degree, eval_monomial, mp_validate, mp_eval, finite_type, coeffs_from_values,
)
from .norms import NormEstimate, NormMethod, WeakNormInput, sup_norm_estimate, sup_norm_multilinear_exact
from .polarize import SymmetricForm, polarization_value, to_symmetric_form, poly_from_form, form_norm_bounds
from .compose import (
    LinearMap, VectorMultiPolynomial, HyperIneqConfig,
    compose_linear, compose_hyper, ideal_inequality_report, hyper_inequality_report, summing_ratio,
)
from .bhlab import BlockPartition, KszInstance, RatioScanResult, bh_exponent, split_embed, ksz_build, ksz_lift, ratio_scan
from .dispatcher import Dispatcher, RunConfig, CommandOutcome, command, get_dispatcher
