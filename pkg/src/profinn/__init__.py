"""High-precision PINN training of self-similar blowup profiles.

Library plus CLI: nested autodiff (spatial jets over a reverse-mode tape),
hard-constraint MLP ansatz, sinh-mapped collocation on unbounded domains,
composite residual loss, Adam and self-scaled quasi-Newton optimizers, and
built-in 1D Burgers / 2D Boussinesq profile problems.
"""

__version__ = "0.1.0"

from .errors import ConfigError, LineSearchError, NumericalError, OracleError
from .jets import Jet2, jet_arith, jet_elementary, seed_input
from .tape import Tape, Var, param_grad

__all__ = [
    "ConfigError",
    "Jet2",
    "LineSearchError",
    "NumericalError",
    "OracleError",
    "Tape",
    "Var",
    "__version__",
    "jet_arith",
    "jet_elementary",
    "param_grad",
    "seed_input",
]


def __getattr__(name):
    # trainer-level conveniences without importing matplotlib-heavy modules
    # at package import time
    if name in ("RunConfig", "StageConfig", "train", "preset", "evaluate",
                "oracle_compare"):
        from . import trainer

        return getattr(trainer, name)
    if name in ("BurgersProblem", "BoussinesqProblem", "burgers_oracle"):
        from . import problems

        return getattr(problems, name)
    raise AttributeError(f"module 'profinn' has no attribute '{name}'")
