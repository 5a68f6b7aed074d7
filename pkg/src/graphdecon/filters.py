"""Polynomial spectral filters on the normalized Laplacian.

Four kernels, all evaluated as truncated power series in L so that
application only ever needs repeated sparse-dense products:

* LOW_PASS_GCN           g(x) = 1 - x          (already a polynomial)
* INVERSE_GCN            g(x) = 1/(1 - x)  ~  sum_{k<=order} x^k
* HEAT_WAVELET           g(x) = exp(-s x)  ~  sum (-s)^k x^k / k!
* INVERSE_HEAT_WAVELET   g(x) = exp(+s x)  ~  sum s^k x^k / k!

`apply_filter` runs the truncated series via Horner's rule and is
differentiable with respect to the signal when handed a tape Tensor.
`apply_filter_exact` is the dense eigendecomposition oracle that applies
the UN-truncated closed-form kernel; it guards the 1/(1-x) pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from . import autodiff as ad
from .graph import NormalizedOperator, OperatorKind

DENSE_LIMIT = 500
_POLE_TOL = 1e-6
_GRID_POINTS = 2001


class FilterKind(Enum):
    LOW_PASS_GCN = "low_pass_gcn"
    INVERSE_GCN = "inverse_gcn"
    HEAT_WAVELET = "heat_wavelet"
    INVERSE_HEAT_WAVELET = "inverse_heat_wavelet"


_WAVELET_KINDS = (FilterKind.HEAT_WAVELET, FilterKind.INVERSE_HEAT_WAVELET)


@dataclass(frozen=True)
class FilterSpec:
    """Description of a polynomial spectral filter.

    order is the truncation order of the power series (ignored for the
    low-pass kernel, which is exactly degree one); scale applies to the
    wavelet kinds only.
    """

    kind: FilterKind
    order: int = 3
    scale: float = 1.0

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.kind is FilterKind.INVERSE_GCN and self.order < 1:
            raise ValueError("inverse filter needs order >= 1")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be finite and positive")


def coefficients(spec: FilterSpec) -> np.ndarray:
    """Power-series coefficients c_0..c_n of the truncated kernel."""
    if spec.kind is FilterKind.LOW_PASS_GCN:
        return np.array([1.0, -1.0])
    if spec.kind is FilterKind.INVERSE_GCN:
        return np.ones(spec.order + 1)
    s = spec.scale
    ks = np.arange(spec.order + 1)
    factorials = np.array([math.factorial(int(k)) for k in ks], dtype=np.float64)
    if spec.kind is FilterKind.HEAT_WAVELET:
        return (-s) ** ks / factorials
    return s**ks / factorials  # INVERSE_HEAT_WAVELET


def closed_form(spec: FilterSpec, lam: np.ndarray) -> np.ndarray:
    """The un-truncated kernel; the INVERSE_GCN pole at 1 is the caller's
    problem (see apply_filter_exact)."""
    lam = np.asarray(lam, dtype=np.float64)
    if spec.kind is FilterKind.LOW_PASS_GCN:
        return 1.0 - lam
    if spec.kind is FilterKind.INVERSE_GCN:
        return 1.0 / (1.0 - lam)
    if spec.kind is FilterKind.HEAT_WAVELET:
        return np.exp(-spec.scale * lam)
    return np.exp(spec.scale * lam)


def response(spec: FilterSpec, lam: float) -> float:
    """Truncated polynomial response at one eigenvalue in [0, 2]."""
    if not (0.0 <= lam <= 2.0):
        raise ValueError(f"eigenvalue {lam} outside the Laplacian spectrum [0, 2]")
    coeffs = coefficients(spec)
    # Horner, matching apply_filter's accumulation order exactly
    acc = coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = c + lam * acc
    return float(acc)


def _require_laplacian(lap: NormalizedOperator) -> None:
    if lap.kind is not OperatorKind.SYM_LAPLACIAN:
        raise ValueError("filters act on the symmetric normalized Laplacian")


def apply_filter(
    spec: FilterSpec, lap: NormalizedOperator, x: Union[np.ndarray, "ad.Tensor"]
) -> Union[np.ndarray, "ad.Tensor"]:
    """Apply the truncated series sum c_k L^k x by Horner's rule.

    Only repeated sparse products against x; powers of L are never formed.
    Accepts a plain array or a tape Tensor (then the result is
    differentiable with respect to x; L stays constant).
    """
    _require_laplacian(lap)
    coeffs = coefficients(spec)
    if isinstance(x, ad.Tensor):
        if x.value.shape[0] != lap.n:
            raise ValueError(f"signal has {x.value.shape[0]} rows, operator is {lap.n}x{lap.n}")
        acc = ad.scalar_mul(coeffs[-1], x)
        for c in coeffs[-2::-1]:
            acc = ad.add(ad.scalar_mul(c, x), ad.spmm(lap.matrix, acc))
        return acc
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != lap.n:
        raise ValueError(f"signal shape {x.shape} incompatible with operator n={lap.n}")
    acc = coeffs[-1] * x
    for c in coeffs[-2::-1]:
        acc = c * x + np.asarray(lap.matrix @ acc)
    return acc


def apply_filter_exact(
    spec: FilterSpec, lap: NormalizedOperator, x: np.ndarray
) -> np.ndarray:
    """Dense-spectral oracle: U g(lambda) U^T x with the closed-form kernel."""
    _require_laplacian(lap)
    if lap.n > DENSE_LIMIT:
        raise ValueError(f"graph too large for the dense oracle ({lap.n} > {DENSE_LIMIT})")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != lap.n:
        raise ValueError(f"signal shape {x.shape} incompatible with operator n={lap.n}")
    lam, u = np.linalg.eigh(lap.matrix.toarray())
    if spec.kind is FilterKind.INVERSE_GCN and np.any(np.abs(1.0 - lam) < _POLE_TOL):
        raise ValueError("inverse kernel 1/(1 - lambda) has a pole: eigenvalue within 1e-6 of 1")
    gains = closed_form(spec, lam)
    return u @ (gains[:, None] * (u.T @ x))


def truncation_error(spec: FilterSpec) -> float:
    """Worst |closed form - truncated series| over a 2001-point grid on [0, 2].

    Defined for the wavelet kinds, whose closed forms are finite on the
    whole spectrum.
    """
    if spec.kind not in _WAVELET_KINDS:
        raise ValueError("truncation_error is defined for the heat-wavelet kinds")
    grid = np.linspace(0.0, 2.0, _GRID_POINTS)
    exact = closed_form(spec, grid)
    truncated = np.polynomial.polynomial.polyval(grid, coefficients(spec))
    return float(np.max(np.abs(exact - truncated)))
