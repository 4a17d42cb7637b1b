"""Truncated Laurent series in the regulator ``z`` and the subtraction operator T."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LaurentFitError",
    "LaurentSeries",
    "laurent_add",
    "laurent_mul",
    "pole_part",
    "subtract_pole",
    "fit_laurent",
    "z_circle",
    "SCHEMES",
]

SCHEMES = ("paper", "minimal")


class LaurentFitError(ArithmeticError):
    """Raised when a contour fit is not trustworthy or a window is empty."""

    def __init__(self, msg: str, residual: float | None = None):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class LaurentSeries:
    """``sum_k a_k z**k`` for ``k`` from ``min_exponent`` upwards.

    ``order`` is the first unknown exponent (the series is known modulo
    ``O(z**order)``); ``None`` marks an exact Laurent polynomial.
    ``residual`` carries the fit diagnostic, if the series came from a fit.
    """

    min_exponent: int
    coefficients: tuple[complex, ...]
    order: int | None = None
    residual: float = 0.0
    meta: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        coeffs = [complex(c) for c in self.coefficients]
        lo = int(self.min_exponent)
        if self.order is not None:
            coeffs = coeffs[: max(0, self.order - lo)]
        # normal form: strip zero edges
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            lo += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            lo = 0 if self.order is None else min(0, self.order)
        object.__setattr__(self, "min_exponent", lo)
        object.__setattr__(self, "coefficients", tuple(coeffs))

    # construction ---------------------------------------------------------
    @classmethod
    def from_dict(cls, d: Mapping[int, complex], order: int | None = None) -> "LaurentSeries":
        if not d:
            return cls(0, (), order)
        lo, hi = min(d), max(d)
        return cls(lo, tuple(d.get(k, 0) for k in range(lo, hi + 1)), order)

    @classmethod
    def constant(cls, c: complex) -> "LaurentSeries":
        return cls(0, (c,))

    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls(0, ())

    # access ---------------------------------------------------------------
    @property
    def max_exponent(self) -> int:
        return self.min_exponent + len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def __getitem__(self, k: int) -> complex:
        if self.order is not None and k >= self.order:
            raise KeyError(f"coefficient z^{k} is beyond the truncation order {self.order}")
        i = k - self.min_exponent
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return 0j

    def coeff(self, k: int) -> complex:
        return self[k]

    def to_dict(self) -> dict[int, complex]:
        return {self.min_exponent + i: c for i, c in enumerate(self.coefficients)}

    def items(self):
        return sorted(self.to_dict().items())

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k, c in self.items():
            out = out + c * z**k
        return out

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return laurent_add(self, _coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.min_exponent, tuple(-c for c in self.coefficients), self.order, self.residual)

    def __sub__(self, other):
        return laurent_add(self, -_coerce(other))

    def __rsub__(self, other):
        return laurent_add(_coerce(other), -self)

    def __mul__(self, other):
        return laurent_mul(self, _coerce(other))

    __rmul__ = __mul__

    def _with_residual(self, r: float) -> "LaurentSeries":
        return LaurentSeries(self.min_exponent, self.coefficients, self.order, r, self.meta)

    def allclose(self, other: "LaurentSeries", atol: float = 1e-12) -> bool:
        ks = set(self.to_dict()) | set(other.to_dict())
        return all(abs(self[k] - other[k]) <= atol for k in ks)

    def __repr__(self):
        if self.is_zero:
            body = "0"
        else:
            body = " + ".join(f"({c:.6g})z^{k}" for k, c in self.items())
        tail = "" if self.order is None else f" + O(z^{self.order})"
        return f"LaurentSeries({body}{tail})"


def _coerce(x) -> LaurentSeries:
    if isinstance(x, LaurentSeries):
        return x
    return LaurentSeries.constant(complex(x))


def _min_order(*orders):
    known = [o for o in orders if o is not None]
    return min(known) if known else None


def laurent_add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    order = _min_order(a.order, b.order)
    d = a.to_dict()
    for k, c in b.to_dict().items():
        d[k] = d.get(k, 0) + c
    if order is not None:
        d = {k: c for k, c in d.items() if k < order}
    return LaurentSeries.from_dict(d, order)._with_residual(a.residual + b.residual)


def laurent_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    if a.is_zero and a.order is None or b.is_zero and b.order is None:
        return LaurentSeries.zero()
    orders = []
    if a.order is not None:
        orders.append(a.order + (b.min_exponent if not b.is_zero else 0))
    if b.order is not None:
        orders.append(b.order + (a.min_exponent if not a.is_zero else 0))
    order = min(orders) if orders else None
    prod = np.convolve(np.array(a.coefficients), np.array(b.coefficients))
    lo = a.min_exponent + b.min_exponent
    if order is not None and lo >= order and prod.size and np.any(prod):
        raise LaurentFitError("product has an empty truncation window")
    d = {lo + i: c for i, c in enumerate(prod)}
    if order is not None:
        d = {k: c for k, c in d.items() if k < order}
    res = a.residual * max(1.0, _norm(b)) + b.residual * max(1.0, _norm(a))
    return LaurentSeries.from_dict(d, order)._with_residual(res)


def _norm(a: LaurentSeries) -> float:
    return max((abs(c) for c in a.coefficients), default=0.0)


def pole_part(a: LaurentSeries, scheme: str = "paper") -> LaurentSeries:
    """The operator T: exponents ``<= 0`` (``paper``) or ``< 0`` (``minimal``).

    The result is an exact Laurent polynomial.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    top = 0 if scheme == "paper" else -1
    if a.order is not None and a.order <= top:
        raise LaurentFitError(f"series known only below z^{a.order}; T needs z^{top}")
    d = {k: c for k, c in a.to_dict().items() if k <= top}
    return LaurentSeries.from_dict(d)._with_residual(a.residual)


def subtract_pole(a: LaurentSeries, scheme: str = "paper") -> LaurentSeries:
    """``(1 - T) a``."""
    return a - pole_part(a, scheme)


def z_circle(radius: float = 0.1, n: int = 32) -> np.ndarray:
    """``n`` equally spaced points on ``|z| = radius``, offset by half a step."""
    if radius <= 0 or n < 2:
        raise ValueError("need radius > 0 and at least two samples")
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    return radius * np.exp(1j * theta)


def _dft_coefficients(zs: np.ndarray, vals: np.ndarray, ks: Iterable[int]) -> np.ndarray:
    # trapezoidal contour rule: a_k = (1/N) sum_j f(z_j) z_j^{-k}
    ks = np.asarray(list(ks))
    return (vals[None, :] * zs[None, :] ** (-ks[:, None])).mean(axis=1)


def fit_laurent(
    samples: Sequence[tuple[complex, complex]] | tuple[np.ndarray, np.ndarray],
    window: tuple[int, int | None] = (-2, 2),
    tol: float = 1e-8,
    check: bool = True,
) -> LaurentSeries:
    """Laurent coefficients from samples on a circle centred at 0.

    Parameters
    ----------
    samples
        Either ``[(z, value), ...]`` or a pair of arrays ``(zs, values)``.
        The points must be equally spaced in angle on one circle.
    window
        ``(lo, hi)`` exponents to return; ``hi=None`` keeps every exponent the
        sample count resolves (``|k| < N/2``).
    tol
        Largest accepted residual (relative to ``max |value|``).
    check
        Raise :class:`LaurentFitError` when the residual exceeds ``tol``.

    Notes
    -----
    The residual is the largest coefficient magnitude over the four exponents
    just below the window (and above ``-N/2``), scaled to the samples.  Those
    coefficients vanish for a function whose pole order the window covers, so
    what remains there is sampling noise plus aliasing of positive powers
    ``N`` steps higher.  With decaying positive coefficients this bounds the
    aliasing inside the window.  A pole deeper than the window shows up there
    as well.  When no such exponents exist, the coefficients of the
    interleaved ``N/2`` subset are compared instead.
    """
    if isinstance(samples, tuple) and len(samples) == 2 and np.ndim(samples[0]) == 1:
        zs, vals = (np.asarray(s, dtype=complex) for s in samples)
    else:
        arr = np.asarray(samples, dtype=complex)
        zs, vals = arr[:, 0], arr[:, 1]
    N = zs.size
    lo, hi = window
    if hi is None:
        hi = (N - 1) // 2
    if hi < lo:
        raise LaurentFitError("empty fit window")
    if N < hi - lo + 1:
        raise LaurentFitError(f"{N} samples cannot resolve {hi - lo + 1} coefficients")
    radii = np.abs(zs)
    rho = radii.mean()
    if np.ptp(radii) > 1e-12 * rho:
        raise LaurentFitError("samples must lie on one circle around 0")
    theta = np.sort(np.mod(np.angle(zs), 2 * np.pi))
    steps = np.diff(np.concatenate([theta, theta[:1] + 2 * np.pi]))
    if np.ptp(steps) > 1e-9:
        raise LaurentFitError("samples must be equally spaced in angle")
    ks = range(lo, hi + 1)
    coeffs = _dft_coefficients(zs, vals, ks)
    scale = float(np.max(np.abs(vals))) or 1.0
    residual = 0.0
    band = range(max(-(N // 2) + 1, lo - 4), lo)
    if len(band):
        noise = _dft_coefficients(zs, vals, band)
        residual = float(np.max(np.abs(noise) * rho ** np.asarray(list(band), dtype=float))) / scale
    elif N >= 4 and N % 2 == 0:
        order = np.argsort(np.mod(np.angle(zs), 2 * np.pi))
        sub = order[::2]
        half = _dft_coefficients(zs[sub], vals[sub], ks)
        diff = np.abs(coeffs - half) * rho ** np.asarray(list(ks), dtype=float)
        residual = float(diff.max()) / scale
    out = LaurentSeries(lo, tuple(coeffs), order=hi + 1, residual=residual)
    if check and residual > tol:
        raise LaurentFitError(
            f"Laurent fit residual {residual:.3e} exceeds tolerance {tol:.1e}", residual
        )
    return out
