"""Combinatorics and certified numerics for theta-recurrent unimodal maps."""

__version__ = "0.1.0"

from .errors import (BracketFailure, InsufficientData, InsufficientPrefix, InvalidWord,  # noqa: E402
                     NotAdmissible, OutOfRange, PrecisionExhausted, ThetaRecurError)
from .cf import (ContinuedFraction, classify_angle, convergents, format_angle,  # noqa: E402
                 is_admissible, parse_angle, sigma_shift)
from .ostrowski import (OstrowskiWord, decode_int, decode_real, encode_int,  # noqa: E402
                        encode_real, increment, tail_bound)
from .symbolic import (build_hierarchy, compare_points, kneading_sequence, neg_count,  # noqa: E402
                       semiconjugacy_phi, sign_of, verify_recurrence)
from .model_map import ModelMap, construct_model  # noqa: E402
from .quadratic import (ParameterEnclosure, ScalingData, closest_returns, find_c,  # noqa: E402
                        iterate_orbit, scaling_data, solve, solve_scaling)
from .audit import audit_apriori, audit_asymptotics, audit_k_bounds, hausdorff_measure  # noqa: E402
from .renorm import BinaryWord, RenormState, recode_word, renorm_step, sturmian_word  # noqa: E402
