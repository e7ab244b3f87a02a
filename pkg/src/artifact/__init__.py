"""Rigid meromorphic cocycles for Q(i): evaluation at special points and recognition.

The subpackages are layered bottom-up:

* :mod:`artifact.padic` for truncated p-adic arithmetic,
* :mod:`artifact.quadspace` for the quadratic space and its lattice enumeration,
* :mod:`artifact.paths` for cusps, Manin-type path decompositions and intersections,
* :mod:`artifact.cocycle` for the finite products and the U_p propagation,
* :mod:`artifact.points` for small RM/CM and big ATR points,
* :mod:`artifact.recognition` for algebraic recognition and the support criterion,
* :mod:`artifact.io`, :mod:`artifact.jobs` and :mod:`artifact.cli` for persistence and orchestration.

:mod:`artifact.validation` gathers the reproducible end-to-end checks.
"""

__version__ = "0.1.0"

from .padic import PadicContext, PadicScalar, QuadExtScalar, hensel_sqrt, make_context, moebius_act
from .quadspace import DivisorSpec, Gauss, VMatrix, chi4, enumerate_sigma0, quad_form
from .paths import INFINITY, ZERO, Cusp, PathChain, base_pair_decompose, intersect, manin_decompose
from .cocycle import (
    SigmaCache,
    ingest_newforms,
    j_eval,
    j_eval_odd,
    phi_eval_direct,
    phi_eval_path,
    sigma4,
    up_square,
    validate_divisor,
    weight,
)
from .points import SpecialPoint, atr_points, build_atr_fields, small_points
from .recognition import algdep, allowed_primes, conj_triv, norm_factorization, support_criterion
from .io import parse_divisor_label, format_divisor_label

__all__ = [
    "__version__",
    "PadicContext",
    "PadicScalar",
    "QuadExtScalar",
    "make_context",
    "hensel_sqrt",
    "moebius_act",
    "DivisorSpec",
    "Gauss",
    "VMatrix",
    "chi4",
    "quad_form",
    "enumerate_sigma0",
    "Cusp",
    "PathChain",
    "INFINITY",
    "ZERO",
    "base_pair_decompose",
    "manin_decompose",
    "intersect",
    "SigmaCache",
    "ingest_newforms",
    "validate_divisor",
    "weight",
    "sigma4",
    "phi_eval_direct",
    "phi_eval_path",
    "up_square",
    "j_eval",
    "j_eval_odd",
    "SpecialPoint",
    "small_points",
    "atr_points",
    "build_atr_fields",
    "algdep",
    "allowed_primes",
    "conj_triv",
    "norm_factorization",
    "support_criterion",
    "parse_divisor_label",
    "format_divisor_label",
]
