"""quadcert: certified bounds for transcendental inequalities over boxes.

Pipeline: expression trees (expr) are bounded through max-plus quadratic
estimators (maxplus), lifted to polynomial optimization problems (pop),
relaxed to SOS programs (relax) solved by the embedded interior-point
solver (sdpsolver), iterated adaptively (optim), and combined with domain
subdivision (subdiv) until every sub-box carries a checkable certificate.
"""

from .expr import Expr, parse_problem, evaluate, differentiate, is_semialgebraic
from .interval import Interval, Box, eval_interval, hessian_interval

__version__ = "0.1.0"

__all__ = [
    "Expr",
    "parse_problem",
    "evaluate",
    "differentiate",
    "is_semialgebraic",
    "Interval",
    "Box",
    "eval_interval",
    "hessian_interval",
    "__version__",
]
