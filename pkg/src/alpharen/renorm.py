"""The recursive R-operation.

For a 1PI diagram ``G`` with proper 1PI subdiagrams ``g``::

    R~_G = U_G + sum_{g_1 * ... * g_k}  C_{g_1} * ... * C_{g_k} * U_G
    C_G  = -T (M_Omega R~_G)
    R_G  = R~_G + C_G

``M_Omega`` is the Taylor projector at zero external momenta up to the
superficial degree ``Omega`` and ``T`` keeps the pole part (with the constant
term in the ``paper`` scheme).  All quantities are sampled on one circle of
regulator values and Laurent-fitted at the end.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import RunConfig
from .graph import FeynmanDiagram, GraphError, VertexOperator, divergence_degree, is_1pi, loop_count
from .laurent import LaurentFitError, LaurentSeries, fit_laurent, pole_part
from .parametric import momentum_array
from .sector import QuadratureError, UnsupportedDivergence, integrate, radial_profile
from .subgraph import Subdiagram, enumerate_disjoint_families, quotient

__all__ = [
    "UnsupportedInsertion",
    "CountertermTerm",
    "LocalCounterterm",
    "StarTerm",
    "RenormalizedAmplitude",
    "TaylorResult",
    "independent_externals",
    "invariant_monomials",
    "monomial_value",
    "taylor_project",
    "star_insert",
    "rtilde_values",
    "rtilde_eval",
    "compute_counterterm",
    "renormalize",
    "locality_check",
    "rtilde_radial_profile",
    "CountertermMemo",
]

Monomial = tuple[tuple[str, str], ...]


class UnsupportedInsertion(NotImplementedError):
    """A counterterm insertion outside the supported (logarithmic) class."""


# --------------------------------------------------------------------------
# kinematics and Taylor projection
# --------------------------------------------------------------------------


def independent_externals(d: FeynmanDiagram) -> tuple[str, ...]:
    """External lines whose momenta are kept; the last one is fixed by conservation."""
    exts = tuple(d.external)
    return exts[:-1]


def invariant_monomials(names: Sequence[str], degree: int) -> list[Monomial]:
    """Products of ``degree`` dot products ``p_a . p_b`` (``a <= b``), sorted."""
    pairs = [(a, b) for i, a in enumerate(names) for b in names[i:]]
    return [tuple(c) for c in itertools.combinations_with_replacement(pairs, degree)]


def monomial_value(mono: Monomial, gram: Mapping[tuple[str, str], float]) -> float:
    out = 1.0
    for a, b in mono:
        out *= gram[(a, b)] if (a, b) in gram else gram[(b, a)]
    return out


def _gram(names, p: Mapping[str, np.ndarray] | None):
    g = {}
    for i, a in enumerate(names):
        for b in names[i:]:
            va = np.zeros(4) if not p or a not in p else np.asarray(p[a], float).reshape(-1)
            vb = np.zeros(4) if not p or b not in p else np.asarray(p[b], float).reshape(-1)
            if va.size == 1:
                va = np.array([va[0], 0, 0, 0])
            if vb.size == 1:
                vb = np.array([vb[0], 0, 0, 0])
            g[(a, b)] = float(va @ vb)
    return g


def _complete(d: FeynmanDiagram, indep: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Full incoming-momentum assignment from the independent ones."""
    exts = tuple(d.external)
    out = {}
    for e in exts[:-1]:
        v = np.asarray(indep.get(e, np.zeros(4)), float).reshape(-1)
        out[e] = np.array([v[0], 0, 0, 0]) if v.size == 1 else v
    if exts:
        out[exts[-1]] = -sum(out.values(), np.zeros(4))
    return out


@dataclass
class TaylorResult:
    """Taylor coefficients ``{monomial: values over z}`` with error estimates."""

    coefficients: dict[Monomial, np.ndarray]
    errors: dict[Monomial, float]
    degree: int

    def polynomial(self, gram) -> np.ndarray:
        return sum(c * monomial_value(m, gram) for m, c in self.coefficients.items())


def _directions(k: int, dmax: int, seed: int) -> list[np.ndarray]:
    """Direction set: axes, diagonal pairs and (for degree >= 2) seeded random ones."""
    e0, e1 = np.eye(4)[0], np.eye(4)[1]
    dirs = []
    for i in range(k):
        u = np.zeros((k, 4))
        u[i] = e0
        dirs.append(u)
    for i, j in itertools.combinations(range(k), 2):
        u = np.zeros((k, 4))
        u[i] = e0
        u[j] = e0
        dirs.append(u)
        u = np.zeros((k, 4))
        u[i] = e0
        u[j] = e1
        dirs.append(u)
    if dmax >= 2 and k >= 1:
        nmono = len(invariant_monomials([str(i) for i in range(k)], dmax))
        rng = np.random.default_rng(seed)
        for _ in range(2 * nmono + 2):
            dirs.append(rng.normal(size=(k, 4)))
    # normalise to unit total Gram trace
    return [u / math.sqrt(float(np.sum(u * u))) for u in dirs]


def taylor_project(
    evaluate: Callable[[list], np.ndarray],
    names: Sequence[str],
    degree: int,
    x_max: float = 0.25,
    nodes: int = 9,
    seed: int = 0,
) -> TaylorResult:
    """Taylor polynomial at zero momentum through momentum degree ``degree``.

    Parameters
    ----------
    evaluate
        Maps a list of ``{name: 4-vector}`` assignments of the independent
        momenta ``names`` to an array ``(P, Z)``.  Only even momentum degrees
        occur for functions of the invariants ``p_a . p_b``.
    x_max
        Largest squared scale along each ray.
    nodes
        Rays are sampled at Chebyshev-Lobatto points in ``x = |p|^2``.

    Notes
    -----
    Along a ray ``p = sqrt(x) u`` the function is a power series in ``x``;
    its ``x^d`` coefficient is the degree-``d`` invariant polynomial at ``u``.
    A polynomial fit over the ray gives those coefficients, and a linear solve
    over the ray directions separates the monomials.  The error estimate is the
    change when the fit degree drops by two.
    """
    if degree < 0:
        return TaylorResult({}, {}, degree)
    names = list(names)
    k = len(names)
    dmax = degree // 2
    if dmax == 0 or k == 0:
        v = evaluate([{}])[0]
        return TaylorResult({(): v}, {(): 0.0}, degree)
    dirs = _directions(k, dmax, seed)
    i = np.arange(nodes)
    xi = 0.5 * (1 - np.cos(np.pi * i / (nodes - 1)))  # in [0, 1]
    configs = [{}]
    index = []
    for u in dirs:
        row = [0]
        for x in xi[1:]:
            configs.append({n: math.sqrt(x * x_max) * u[j] for j, n in enumerate(names)})
            row.append(len(configs) - 1)
        index.append(row)
    vals = evaluate(configs)  # (P, Z)
    V = np.vander(xi, nodes, increasing=True)
    Vlow = np.vander(xi, nodes - 2, increasing=True)
    phi = np.zeros((len(dirs), dmax + 1, vals.shape[1]), dtype=complex)
    phi_err = np.zeros((len(dirs), dmax + 1))
    for r, row in enumerate(index):
        y = vals[row]
        c_hi = np.linalg.solve(V, y)
        c_lo = np.linalg.lstsq(Vlow, y, rcond=None)[0]
        for dd in range(dmax + 1):
            phi[r, dd] = c_hi[dd] / x_max**dd
            phi_err[r, dd] = float(np.max(np.abs(c_hi[dd] - c_lo[dd]))) / x_max**dd
    coeffs, errs = {}, {}
    for dd in range(dmax + 1):
        monos = invariant_monomials(names, dd)
        A = np.array([[monomial_value(m, _gram(names, {n: u[j] for j, n in enumerate(names)})) for m in monos] for u in dirs])
        rank = np.linalg.matrix_rank(A)
        if rank < len(monos):
            raise ArithmeticError("ray directions do not separate the Taylor monomials")
        sol, *_ = np.linalg.lstsq(A, phi[:, dd], rcond=None)
        err = np.linalg.lstsq(A, phi_err[:, dd], rcond=None)[0]
        resid = np.max(np.abs(A @ sol - phi[:, dd]))
        for m, c, e in zip(monos, sol, err):
            coeffs[m] = c
            errs[m] = float(abs(e) + resid)
    return TaylorResult(coeffs, errs, degree)


# --------------------------------------------------------------------------
# counterterms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CountertermTerm:
    """``delta^{(m)}(alpha) * coeff * monomial`` with ``monomial`` in external invariants."""

    m: tuple[int, ...]
    monomial: Monomial
    coeff: LaurentSeries

    @property
    def degree(self) -> int:
        return 2 * len(self.monomial)


@dataclass(frozen=True)
class LocalCounterterm:
    diagram: FeynmanDiagram
    omega: int
    terms: tuple[CountertermTerm, ...]
    scheme: str = "paper"
    diagnostics: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.check()

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def check(self):
        """Homogeneity ``|m| + deg P / 2 = Omega / 2`` and ``deg P <= Omega``."""
        n = len(self.diagram.internal)
        for t in self.terms:
            if len(t.m) != n or any(x < 0 for x in t.m):
                raise GraphError("multi-index does not match the internal lines")
            if 2 * sum(t.m) + t.degree != self.omega or t.degree > self.omega:
                raise GraphError(
                    f"counterterm term violates homogeneity: |m|={sum(t.m)}, deg={t.degree}, Omega={self.omega}"
                )
            if t.coeff.max_exponent > 0 and not t.coeff.is_zero:
                raise GraphError("counterterm coefficients must not contain positive powers of z")

    def value(self, p: Mapping[str, Sequence[float]] | None = None) -> LaurentSeries:
        """Sum of the terms at external momenta ``p`` (independent ones used)."""
        names = independent_externals(self.diagram)
        gram = _gram(names, p)
        out = LaurentSeries.zero()
        for t in self.terms:
            out = out + t.coeff * monomial_value(t.monomial, gram)
        return out

    def values(self, p, zs) -> np.ndarray:
        return self.value(p)(zs)

    def constant(self) -> LaurentSeries:
        out = LaurentSeries.zero()
        for t in self.terms:
            if not t.monomial:
                out = out + t.coeff
        return out


@dataclass(frozen=True)
class StarTerm:
    """One term of ``C_{g_1} * ... * C_{g_k} * U``: a quotient diagram with a weight."""

    diagram: FeynmanDiagram
    weight: LaurentSeries
    m: tuple[tuple[int, ...], ...]

    @property
    def has_derivatives(self) -> bool:
        return any(any(v) for v in self.m)


def star_insert(d: FeynmanDiagram, family: Sequence[Subdiagram], cts: Sequence[LocalCounterterm]) -> list[StarTerm]:
    """Expand the product of counterterm sums into weighted quotient diagrams.

    The vertex replacing ``g_i`` carries the momentum monomial of the chosen
    term (rewritten in the legs of ``g_i``); the Laurent weights multiply.
    """
    if len(cts) != len(family):
        raise GraphError("one counterterm per family member is required")
    for s, ct in zip(family, cts):
        if set(ct.diagram.internal) != set(s.lines) or set(ct.diagram.vertices) != set(s.vertices):
            raise GraphError("counterterm does not belong to this subdiagram")
    out = []
    for choice in itertools.product(*[ct.terms for ct in cts]):
        ops = []
        weight = LaurentSeries.constant(1.0)
        for t in choice:
            op = VertexOperator.one()
            for a, b in t.monomial:
                op = op * VertexOperator.dot(a, b)
            ops.append(op)
            weight = weight * t.coeff
        q = quotient(d, family, ops)
        out.append(StarTerm(q, weight, tuple(t.m for t in choice)))
    return out


class CountertermMemo(dict):
    """Counterterms keyed by ``(diagram, config)``; filled leaves-first."""


def _config_key(cfg: RunConfig):
    return cfg.key()


def _eval_amplitude(d: FeynmanDiagram, ps, cfg: RunConfig, diag: dict) -> np.ndarray:
    try:
        res = integrate(d, ps, cfg.zs, rtol=cfg.rtol_quad, max_nodes=cfg.max_nodes)
    except (QuadratureError, UnsupportedDivergence) as exc:
        raise type(exc)(f"{d.name or 'diagram'}: {exc}") from exc
    diag.setdefault("integrations", []).append(
        {"diagram": d.name, "points": len(ps), "nodes_per_dim": res.nodes_per_dim, "error": res.error, "sectors": res.sectors}
    )
    return res.values


def _star_terms(d: FeynmanDiagram, cfg: RunConfig, memo: CountertermMemo) -> list[StarTerm]:
    if not cfg.subtract or loop_count(d.graph) == 0:
        return []
    terms = []
    for fam in enumerate_disjoint_families(d, cfg.max_lines):
        cts = [compute_counterterm(s.diagram, cfg, memo) for s in fam]
        if any(ct.is_empty for ct in cts):
            continue
        terms.extend(star_insert(d, fam, cts))
    return terms


def rtilde_values(d: FeynmanDiagram, ps, cfg: RunConfig | None = None, memo: CountertermMemo | None = None, diag: dict | None = None) -> np.ndarray:
    """``R~`` sampled on the regulator circle at momentum points ``ps``: ``(P, Z)``."""
    cfg = cfg or RunConfig()
    memo = CountertermMemo() if memo is None else memo
    diag = {} if diag is None else diag
    ps = list(ps)
    stars = _star_terms(d, cfg, memo)
    # reject unsupported insertions before any expensive integration
    for st in stars:
        if st.has_derivatives:
            raise UnsupportedInsertion(
                "insertion of a counterterm with delta-derivatives (|m| > 0) is not supported"
            )
        if not st.diagram.has_constant_vertices:
            raise UnsupportedInsertion(
                "insertion of a momentum-dependent counterterm (non-logarithmic subdivergence) is not supported"
            )
    total = _eval_amplitude(d, ps, cfg, diag).copy()
    zs = cfg.zs
    for st in stars:
        total += st.weight(zs)[None, :] * _eval_amplitude(st.diagram, ps, cfg, diag)
    diag["star_terms"] = diag.get("star_terms", 0) + len(stars)
    return total


def rtilde_eval(d: FeynmanDiagram, p=None, z=None, cfg: RunConfig | None = None, memo=None) -> np.ndarray:
    """``R~`` at one momentum point for every regulator sample of ``cfg`` (or ``z``)."""
    cfg = cfg or RunConfig()
    vals = rtilde_values(d, [p], cfg, memo)[0]
    if z is None:
        return vals
    zs = cfg.zs
    idx = [int(np.argmin(np.abs(zs - zz))) for zz in np.atleast_1d(z)]
    if any(abs(zs[i] - zz) > 1e-12 for i, zz in zip(idx, np.atleast_1d(z))):
        raise ValueError("z must be one of the configured regulator samples")
    return vals[idx] if np.ndim(z) else vals[idx[0]]


def _window(d: FeynmanDiagram) -> tuple[int, int]:
    return (-2 * max(1, loop_count(d.graph)), 2)


def _taylor(d: FeynmanDiagram, degree: int, cfg: RunConfig, memo, diag) -> TaylorResult:
    names = independent_externals(d)
    m2 = min(d.masses.values()) ** 2 if d.masses else 1.0

    def evaluate(configs):
        ps = [_complete(d, c) for c in configs]
        return rtilde_values(d, ps, cfg, memo, diag)

    return taylor_project(evaluate, names, degree, cfg.taylor_radius * m2, cfg.taylor_nodes, cfg.seed)


def _fit_taylor(tay: TaylorResult, zs: np.ndarray, window, tol: float) -> dict[Monomial, LaurentSeries | None]:
    """Laurent fit of every Taylor coefficient, judged on the scale of its degree.

    Coefficients that vanish by symmetry consist of quadrature noise; their
    fit residual is measured against the largest coefficient of the same
    degree rather than against themselves.  Coefficients whose every Laurent
    term lies below that noise floor map to ``None`` (numerically zero).
    """
    scale: dict[int, float] = {}
    for mono, vals in tay.coefficients.items():
        scale[len(mono)] = max(scale.get(len(mono), 0.0), float(np.max(np.abs(vals))))
    rho = float(np.abs(zs[0]))
    out = {}
    for mono, vals in sorted(tay.coefficients.items()):
        ref = scale[len(mono)] or 1.0
        s = fit_laurent((zs, vals), window, check=False)
        own = float(np.max(np.abs(vals)))
        if s.residual * own > tol * ref:
            raise LaurentFitError(
                f"Laurent fit residual {s.residual * own / ref:.3e} exceeds tolerance {tol:.1e}",
                s.residual * own / ref,
            )
        size = max((abs(c) * rho**k for k, c in s.items()), default=0.0)
        out[mono] = None if size <= tol * ref else s
    return out


def compute_counterterm(d: FeynmanDiagram, cfg: RunConfig | None = None, memo: CountertermMemo | None = None) -> LocalCounterterm:
    """``C = -T(M_Omega R~)`` as a local counterterm."""
    cfg = cfg or RunConfig()
    memo = CountertermMemo() if memo is None else memo
    key = (d, _config_key(cfg))
    if key in memo:
        return memo[key]
    if not is_1pi(d.graph):
        raise GraphError("counterterms are defined for 1PI diagrams")
    omega = divergence_degree(d)
    n = len(d.internal)
    if omega < 0 or n == 0 or loop_count(d.graph) == 0 or not cfg.subtract:
        ct = LocalCounterterm(d, omega, (), cfg.scheme)
        memo[key] = ct
        return ct
    if omega % 2:
        raise GraphError("odd superficial degree: no homogeneous scalar counterterm exists")
    diag: dict = {}
    tay = _taylor(d, omega, cfg, memo, diag)
    terms = []
    residuals = {}
    zs = cfg.zs
    for mono, series in _fit_taylor(tay, zs, _window(d), cfg.tol_fit).items():
        if series is None:
            continue
        residuals[mono] = series.residual
        c = -pole_part(series, cfg.scheme)
        if c.is_zero:
            continue
        k = (omega - 2 * len(mono)) // 2
        m = (k,) + (0,) * (n - 1)
        terms.append(CountertermTerm(m, mono, c))
    diag.update({"fit_residuals": residuals, "taylor_errors": tay.errors})
    ct = LocalCounterterm(d, omega, tuple(terms), cfg.scheme, diag)
    memo[key] = ct
    return ct


# --------------------------------------------------------------------------
# renormalised amplitudes
# --------------------------------------------------------------------------


@dataclass
class RenormalizedAmplitude:
    diagram: FeynmanDiagram
    points: list
    series: list[LaurentSeries]
    rtilde: list[LaurentSeries]
    counterterm: LocalCounterterm
    certified: list[bool]
    ratios: list[float]
    diagnostics: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return all(self.certified)


def _pole_ratio(r: LaurentSeries, rt: LaurentSeries) -> float:
    neg = max((abs(c) for k, c in r.items() if k < 0), default=0.0)
    scale = max(abs(r[0]), abs(rt[0]))
    if neg == 0:
        return 0.0
    return neg / scale if scale > 0 else math.inf


def renormalize(d: FeynmanDiagram, points: Sequence | None = None, cfg: RunConfig | None = None, memo: CountertermMemo | None = None) -> RenormalizedAmplitude:
    """``R = (1 - T M_Omega) R~`` at each momentum point, with finiteness certification.

    A point is certified when every negative-exponent coefficient is at most
    ``tol_finite`` times ``max(|R_0|, |R~_0|)``.
    """
    cfg = cfg or RunConfig()
    memo = CountertermMemo() if memo is None else memo
    points = [None] if points is None else list(points)
    if len(d.internal) and not is_1pi(d.graph) and loop_count(d.graph) > 0:
        raise GraphError("renormalisation is defined for 1PI diagrams")
    ct = compute_counterterm(d, cfg, memo) if is_1pi(d.graph) else LocalCounterterm(d, 0, (), cfg.scheme)
    diag: dict = {"counterterm": ct.diagnostics}
    for p in points:
        momentum_array(d, p)  # conservation check
    ps = points
    vals = rtilde_values(d, ps, cfg, memo, diag)
    zs = cfg.zs
    series, rts, ok, ratios = [], [], [], []
    for p, v in zip(points, vals):
        rt = fit_laurent((zs, v), _window(d), tol=cfg.tol_fit)
        r = rt + ct.value(p)
        ratio = _pole_ratio(r, rt)
        rts.append(rt)
        series.append(r)
        ratios.append(ratio)
        ok.append(bool(ratio <= cfg.tol_finite))
    return RenormalizedAmplitude(d, points, series, rts, ct, ok, ratios, diag)


def locality_check(d: FeynmanDiagram, degrees: Sequence[int], cfg: RunConfig | None = None, memo=None) -> dict[int, float]:
    """Relative size of the pole parts of the Taylor coefficients of ``R~``.

    For each momentum degree returns ``max |pole coeff| / max |z^0 coeff|`` over
    the monomials of that degree.  Odd degrees vanish identically.
    """
    cfg = cfg or RunConfig()
    memo = CountertermMemo() if memo is None else memo
    out = {}
    top = max(degrees)
    diag: dict = {}
    tay = _taylor(d, top, cfg, memo, diag)
    fits = _fit_taylor(tay, cfg.zs, _window(d), cfg.tol_fit)
    for deg in degrees:
        if deg % 2:
            out[deg] = 0.0
            continue
        neg, scale = 0.0, 0.0
        for mono, s in fits.items():
            if 2 * len(mono) != deg or s is None:
                continue
            neg = max(neg, max((abs(c) for k, c in s.items() if k < 0), default=0.0))
            scale = max(scale, abs(s[0]))
        out[deg] = neg / scale if scale else (0.0 if neg == 0 else math.inf)
    return out


def rtilde_radial_profile(d: FeynmanDiagram, p, z, lambdas, cfg: RunConfig | None = None, memo=None, **kw) -> np.ndarray:
    """Radial profile of ``R~``: the bare profile plus weighted quotient profiles.

    A ``*``-term is supported at ``alpha_g = 0``, so only the quotient lines
    take part in the radial variable.
    """
    cfg = cfg or RunConfig()
    memo = CountertermMemo() if memo is None else memo
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = radial_profile(d, p, z, lambdas, **kw)
    for st in _star_terms(d, cfg, memo):
        if st.has_derivatives or not st.diagram.has_constant_vertices:
            raise UnsupportedInsertion("only logarithmic counterterm insertions are supported")
        out = out + st.weight(z)[None, :] * radial_profile(st.diagram, p, z, lambdas, **kw)
    return out
