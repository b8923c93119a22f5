"""Best rational approximation on an interval, in adaptive barycentric form.

Three solvers share one representation: a continuous-domain Remez iteration
with a symmetric-eigenproblem core, the discrete AAA-Lawson reweighting
method (also the Remez initializer), and a linear-programming differential
correction descent on a grid.
"""

from .aaa_lawson import SampleGrid, aaa, aaa_lawson_solve
from .barycentric import BarycentricRational, Interval, evaluate, make, poles_zeros, to_quotient
from .dc import dc_solve
from .driver import ProblemSpec, SolveReport, minimax_solve
from .refsearch import InsufficientOscillation
from .remez_core import NoPoleFreeSolution, WeightFn

__version__ = "0.1.0"

__all__ = [
    "BarycentricRational",
    "Interval",
    "InsufficientOscillation",
    "NoPoleFreeSolution",
    "ProblemSpec",
    "SampleGrid",
    "SolveReport",
    "WeightFn",
    "aaa",
    "aaa_lawson_solve",
    "dc_solve",
    "evaluate",
    "make",
    "minimax_solve",
    "poles_zeros",
    "to_quotient",
]
