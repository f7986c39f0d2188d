"""Numerical evaluation of ``I_J`` as a one-dimensional integral.

``I_J`` also equals ``integral_0^1 prod_{i in J} (x**-p_i - 1) dx``.  The
integrand blows up like ``x**-q_J`` at the origin.  With ``x = v**c`` and
``c = 1 / (1 - q_J)`` the power of ``v`` cancels exactly and the integral
becomes::

    c * integral_0^1 prod_{i in J} (1 - v**(c p_i)) dv

which is bounded by ``c`` on the whole interval.  It still has unbounded
derivatives at ``v = 0`` (exponents ``c p_i < 1``), which the adaptive
bisection below refines into.

This module is an oracle: it shares no code with the subset recurrence.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from irmcache.popularity import Popularity
from irmcache.subsets import SubsetIndex

__all__ = ["QuadratureResult", "QuadratureError", "i_integral", "adaptive_gk15"]

MAX_EVALUATIONS = 10**7

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes on [-1, 1]
_K_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: xgk[1], xgk[3], xgk[5], xgk[7]
for _k, _w in zip((1, 3, 5), _WG[:3]):
    _G_WEIGHTS[_k] = _w
    _G_WEIGHTS[14 - _k] = _w
_G_WEIGHTS[7] = _WG[3]


class QuadratureError(RuntimeError):
    """The requested accuracy was not reached within the evaluation budget."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _gk15(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = f(mid + half * _NODES)
    kronrod = half * float(_K_WEIGHTS @ fx)
    gauss = half * float(_G_WEIGHTS @ fx)
    return kronrod, abs(kronrod - gauss)


def adaptive_gk15(f, a: float, b: float, tol: float, max_evaluations: int = MAX_EVALUATIONS):
    """Integrate a vectorized ``f`` over ``[a, b]`` to absolute error ``tol``.

    The interval with the largest local error estimate is bisected until the
    summed estimates drop to ``tol``.  Raises :class:`QuadratureError` when the
    budget runs out.
    """
    value, err = _gk15(f, a, b)
    evaluations = 15
    heap = [(-err, a, b, value)]
    total_err = err
    while total_err > tol:
        if evaluations + 30 > max_evaluations:
            raise QuadratureError(
                f"error estimate {total_err:.3g} above tol {tol:.3g} after "
                f"{evaluations} evaluations"
            )
        neg_err, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError(
                f"interval [{lo!r}, {hi!r}] cannot be split further; "
                f"error estimate {total_err:.3g} above tol {tol:.3g}"
            )
        left, left_err = _gk15(f, lo, mid)
        right, right_err = _gk15(f, mid, hi)
        evaluations += 30
        heapq.heappush(heap, (-left_err, lo, mid, left))
        heapq.heappush(heap, (-right_err, mid, hi, right))
        # recompute rather than update incrementally to avoid drift
        total_err = math.fsum(-e for e, *_ in heap)
    value = math.fsum(v for *_, v in heap)
    return QuadratureResult(value, total_err, evaluations)


def _transformed_integrand(p: np.ndarray, c: float):
    exps = c * p

    def g(v):
        logv = np.log(v)[:, None]
        # 1 - v**e, accurate when v**e is close to 1
        return c * np.prod(-np.expm1(exps * logv), axis=1)

    return g


def i_integral(pop: Popularity, s, tol: float = 1e-10) -> QuadratureResult:
    """Evaluate ``I_J`` by adaptive quadrature.

    Parameters
    ----------
    pop : Popularity
    s : SubsetIndex or int
        The subset ``J``; ``1 <= |J| <= m - 1``.
    tol : float
        Absolute error target, between 1e-12 and 1e-3.
    """
    sub = s if isinstance(s, SubsetIndex) else SubsetIndex.from_mask(s)
    if sub.mask >> pop.m:
        raise ValueError(f"mask {sub.mask:#b} has bits outside the {pop.m} items")
    if not 1 <= sub.size <= pop.m - 1:
        raise ValueError(f"|J| must be in [1, {pop.m - 1}], got {sub.size}")
    if not 1e-12 <= tol <= 1e-3:
        raise ValueError(f"tol must be in [1e-12, 1e-3], got {tol!r}")
    p = pop.probs[sub.items()]
    rest = math.fsum(np.delete(pop.probs, sub.items()).tolist())
    if rest <= 0:
        raise ValueError("subset carries all the probability mass; I_J diverges")
    c = 1.0 / rest
    return adaptive_gk15(_transformed_integrand(p, c), 0.0, 1.0, tol)
