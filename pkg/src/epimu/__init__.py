"""Model checking fixpoint formulas with knowledge operators under
synchronous perfect recall, for formulas whose open knowledge operators
belong to agents with nested observations."""

__version__ = "0.1.0"

from .checker import CheckResult, build_ins_tree, model_check, pullback_result  # noqa: E402
from .config import Config  # noqa: E402
from .distinction import (InSplitting, a_distinction, compose, identity,  # noqa: E402
                          is_a_distinguished, preimage, verify_in_splitting)
from .errors import (BudgetExceeded, EpimuError, InputError,  # noqa: E402
                     NonMixingError, ParseError)
from .finitary import compute_gamma, eval_finitary  # noqa: E402
from .formula import (check_nonmixing, expand_macro, parse_formula,  # noqa: E402
                      syntactic_tree, to_text)
from .mas import Mas, load_mas, obs_equiv, parse_mas, runs_up_to, validate_mas  # noqa: E402
