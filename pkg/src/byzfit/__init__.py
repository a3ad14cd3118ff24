"""Polynomial fitting when some samples are noisy and some are adversarial.

Exact fields (rationals, GF(q)) use Welch-Berlekamp decoding, optionally
wrapped in a search over a discrete noise alphabet.  Real-valued data uses a
Chebyshev-basis linear program, preceded by a local-consensus filter that
discards Byzantine samples.
"""

from .aggregate import (Adversarial, Constant, DiscreteAlphabet, FitterConfig, Generator, MergePlan, Partition,
                        UniformBand, UniformInBox, aggregate, fit_local, generate, halton, merge_hierarchical)
from .chebyshev import ChebModel, cheb_to_monomial, chebyshev_eval, evaluate_model, monomial_to_cheb
from .dataset import DataSet
from .errors import (BudgetExceeded, Exhausted, FitFailure, Infeasible, InsufficientCleanData, KindMismatch,
                     NoDegreeFits, NotDivisible, NumericalFailure, TooManyErrors)
from .expr import parse_poly
from .fields import QQ, RR, GF, PrimeField, field_from_spec
from .lpfit import (FilterConfig, LPInstance, boundedness_audit, build_lp, byzantine_filter, derivative_bound_audit,
                    fit_robust, rescale, sample_size, solve_lp)
from .mvwb import MVProblem, mv_noise_enumerate_fit, mv_report, mv_wb_decode, required_sample_size
from .poly import MultiPoly, count_monomials, divide_by_univariate, evaluate, monomials, mul
from .report import FitReport
from .wb import NoiseAlphabet, WBProblem, degree_search, noise_enumerate_fit, wb_decode

__version__ = "0.1.0"
