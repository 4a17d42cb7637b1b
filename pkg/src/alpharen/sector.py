"""Numerical alpha-integration with analytic continuation in the regulator.

The amplitude ``int d^n alpha prod alpha^z pi^{2L} U^{-2} exp(-F/U - sum alpha m^2)``
is split into Hepp sectors (orderings of the alphas).  In the sector of the
permutation ``sigma`` we write ``alpha_{sigma(1)} = lam`` and
``alpha_{sigma(k)} = lam * t_2 * ... * t_k``.  The ``lam`` integral is done in
closed form, ``Gamma(s) H^{-s}``, and the remaining integrand factorises as
``prod_j t_j^{e_j} G(t)`` with ``G`` smooth and positive at the faces.  Exponents
``e_j = -1 + b_j z`` (logarithmic subdivergences) are continued to ``z -> 0`` by
subtracting ``G`` at ``t_j = 0`` and integrating the subtracted term exactly.

The partition of unity ``eta_A`` on the simplex ``|beta| = 1`` and the
factorised (nested Gaussian) evaluation live here too.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.special as sc
from scipy.stats import qmc

from .graph import FeynmanDiagram, GraphError, loop_count
from .laurent import LaurentSeries
from .parametric import build_loop_basis, graph_polynomials, momentum_array
from .subgraph import painted_components

__all__ = [
    "QuadratureError",
    "UnsupportedDivergence",
    "SectorPartition",
    "build_partition",
    "IntegrationResult",
    "integrate",
    "amplitude_values",
    "sector_eval",
    "radial_profile",
    "analytic_lambda",
    "lambda_split_amplitude",
    "worker_count",
]

MAX_INTEGRATION_LINES = 6
MC_DIMENSION = 5


class QuadratureError(ArithmeticError):
    """Quadrature did not reach the requested accuracy."""


class UnsupportedDivergence(NotImplementedError):
    """A subdivergence worse than logarithmic was met."""


def worker_count() -> int:
    try:
        n = int(os.environ.get("ALPHAREN_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


# --------------------------------------------------------------------------
# partition of unity on the simplex
# --------------------------------------------------------------------------


def _smootherstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6 * x - 15) + 10)


@dataclass(frozen=True)
class SectorPartition:
    """Smooth partition ``eta~_A`` of the simplex, ``A`` a proper subset of lines.

    ``eta_A = prod_{i in A} low(beta_i) * prod_{i not in A} (1 - low(beta_i))``
    where ``low`` is 1 below ``delta (1 - gamma)`` and 0 above ``delta (1 + gamma)``.
    """

    n: int
    delta: float
    gamma: float
    subsets: tuple[frozenset[int], ...] = field(repr=False)

    def low(self, x):
        lo, hi = self.delta * (1 - self.gamma), self.delta * (1 + self.gamma)
        return 1.0 - _smootherstep((np.asarray(x, dtype=float) - lo) / (hi - lo))

    def eta(self, A: frozenset[int], beta: np.ndarray) -> np.ndarray:
        beta = np.atleast_2d(beta)
        s = self.low(beta)
        out = np.ones(beta.shape[0])
        for i in range(self.n):
            out = out * (s[:, i] if i in A else 1.0 - s[:, i])
        return out

    def eta_tilde(self, A, beta: np.ndarray) -> np.ndarray:
        A = frozenset(A)
        if A not in self.subsets:
            raise GraphError(f"{sorted(A)} is not a member of the partition")
        beta = np.atleast_2d(beta)
        total = sum(self.eta(B, beta) for B in self.subsets)
        return self.eta(A, beta) / total


def build_partition(n: int, delta: float | None = None, gamma: float = 1 / 8) -> SectorPartition:
    """Partition of unity for ``n`` lines; defaults ``delta = 1/(4n)``."""
    if n < 1:
        raise GraphError("need at least one line")
    delta = 1.0 / (4 * n) if delta is None else float(delta)
    if not (0 < gamma < 1 and 0 < delta * (1 + gamma) < 1.0 / n):
        raise GraphError("partition parameters must satisfy 0 < delta (1 + gamma) < 1/n")
    subsets = tuple(
        frozenset(c) for k in range(n) for c in itertools.combinations(range(n), k)
    )
    return SectorPartition(n, delta, gamma, subsets)


# --------------------------------------------------------------------------
# Hepp-sector plans
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Sector:
    sigma: tuple[int, ...]
    U_t: np.ndarray  # (M_U, D) t-exponents of U / prod t^u
    F_t: np.ndarray  # (M_F, D)
    a_t: np.ndarray  # (n, D) t-exponents of a_r, rows in line order
    c: np.ndarray  # integer parts of e_j
    b: np.ndarray  # z-coefficients of e_j


@dataclass(frozen=True)
class _Plan:
    n: int
    L: int
    lines: tuple[str, ...]
    sectors: tuple[_Sector, ...]
    m2: np.ndarray
    prefactor: float


def _t_exponents(exps: np.ndarray, pos: np.ndarray, n: int) -> np.ndarray:
    # alpha_r = prod_{j=2..pos(r)} t_j; column j-2 counts factors t_j
    D = n - 1
    out = np.zeros((exps.shape[0], D), dtype=int)
    for j in range(2, n + 1):
        mask = pos >= j
        out[:, j - 2] = exps[:, mask].sum(axis=1)
    return out


@lru_cache(maxsize=128)
def _plan(d: FeynmanDiagram) -> _Plan:
    n = len(d.internal)
    if n > MAX_INTEGRATION_LINES:
        raise GraphError(
            f"{n} internal lines: sector integration is limited to {MAX_INTEGRATION_LINES}"
        )
    if not d.has_constant_vertices:
        raise GraphError("sector integration supports constant vertex operators only")
    masses = np.array([d.masses[r] for r in d.internal])
    if n and np.any(masses <= 0):
        raise GraphError("sector integration needs strictly positive masses")
    poly = graph_polynomials(d)
    L = poly.L
    sectors = []
    for sigma in itertools.permutations(range(n)):
        pos = np.empty(n, dtype=int)
        pos[list(sigma)] = np.arange(1, n + 1)
        Ut = _t_exponents(poly.U_exps, pos, n)
        u = Ut.min(axis=0) if Ut.size else np.zeros(n - 1, dtype=int)
        Ft = _t_exponents(poly.F_exps, pos, n) - u if poly.F_exps.size else np.zeros((0, n - 1), dtype=int)
        if Ft.size and Ft.min() < 0:
            raise ArithmeticError("F does not factorise in a Hepp sector")
        at = _t_exponents(np.eye(n, dtype=int), pos, n)
        j = np.arange(2, n + 1)
        c = (n - j) - 2 * u
        b = n - j + 1
        sectors.append(_Sector(tuple(sigma), Ut - u, Ft, at, c, b))
    pref = math.pi ** (2 * L) * d.constant_factor()
    return _Plan(n, L, tuple(d.internal), tuple(sectors), masses**2, pref)


def _gl_nodes(m: int, power: int):
    x, w = np.polynomial.legendre.leggauss(m)
    u = 0.5 * (x + 1.0)
    return u, 0.5 * w


def _grid(D: int, m: int, power: int, mc_seed: int | None = None):
    """Nodes ``u`` in ``(0,1)^D`` with weights (the map ``t = u^power`` applied later)."""
    if D == 0:
        return np.zeros((1, 0)), np.ones(1)
    if D > MC_DIMENSION:
        # scrambled Sobol points; seed fixed and reported in diagnostics
        k = max(8, int(math.ceil(math.log2(max(2, m) ** 3))))
        pts = qmc.Sobol(D, scramble=True, seed=mc_seed or 0).random_base2(k)
        pts = np.clip(pts, 1e-300, 1.0)
        return pts, np.full(pts.shape[0], 1.0 / pts.shape[0])
    u, w = _gl_nodes(m, power)
    U = np.stack(np.meshgrid(*([u] * D), indexing="ij"), axis=-1).reshape(-1, D)
    W = np.prod(np.stack(np.meshgrid(*([w] * D), indexing="ij"), axis=-1).reshape(-1, D), axis=1)
    return U, W


def _mono(t: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """``prod_j t[:, j] ** exps[m, j]`` as an ``(N, M)`` array (``0**0 = 1``)."""
    out = np.ones((t.shape[0], exps.shape[0]))
    for j in range(exps.shape[1]):
        e = exps[:, j]
        if np.any(e):
            out *= t[:, j : j + 1] ** e[None, :]
    return out


@dataclass
class _Kernel:
    """Evaluates ``log U'``, ``H`` and the alpha-point of a sector at t-points."""

    plan: _Plan
    kin: np.ndarray  # (M_F, P)
    weight: Callable[[np.ndarray], np.ndarray] | None = None
    gaussian: Callable | None = None

    def __call__(self, sec: _Sector, t: np.ndarray):
        a = _mono(t, sec.a_t)  # (N, n)
        if self.gaussian is not None:
            U, H = self.gaussian(a)
            # divide out the factored powers of t numerically
            Up = U / np.prod(t ** (_plan_u(sec, self.plan))[None, :], axis=1) if t.shape[1] else U
            logU = np.log(Up)
        else:
            Umono = _mono(t, sec.U_t)
            Up = Umono.sum(axis=1)
            logU = np.log(Up)
            H = (a @ self.plan.m2)[:, None] * np.ones((1, self.kin.shape[1]))
            if sec.F_t.size:
                H = H + (_mono(t, sec.F_t) @ self.kin) / Up[:, None]
        w = None
        if self.weight is not None:
            beta = a / a.sum(axis=1, keepdims=True)
            w = self.weight(beta)
        return logU, H, w


def _plan_u(sec: _Sector, plan: _Plan) -> np.ndarray:
    # loop numbers recovered from the integer exponents: c_j = (n - j) - 2 u_j
    j = np.arange(2, plan.n + 1)
    return ((plan.n - j) - sec.c) // 2


@dataclass
class IntegrationResult:
    values: np.ndarray  # (P, Z)
    error: float
    nodes_per_dim: int
    levels: int
    sectors: int
    terms: int
    diagnostics: dict = field(default_factory=dict)


def _sector_total(kernel: _Kernel, sec: _Sector, zs: np.ndarray, m: int, power: int, chunk: int):
    plan = kernel.plan
    n = plan.n
    D = n - 1
    P = kernel.kin.shape[1]
    Z = zs.size
    s = n * (1 + zs) - 2 * plan.L
    gam = sc.gamma(s)
    e = sec.c[:, None] + sec.b[:, None] * zs[None, :]  # (D, Z)
    if np.any(sec.c <= -2):
        raise UnsupportedDivergence(
            "subdivergence worse than logarithmic (quadratic or higher) in a Hepp sector"
        )
    # the factorized route is only used where every e_j > -1: no subtraction
    J = [] if kernel.gaussian is not None else [j for j in range(D) if sec.c[j] == -1]
    total = np.zeros((P, Z), dtype=complex)
    nterms = 0
    for k in range(len(J) + 1):
        for S in itertools.combinations(J, k):
            free = [j for j in range(D) if j not in S]
            rest = [j for j in J if j not in S]
            coef = np.ones(Z, dtype=complex)
            for j in S:
                coef = coef / (sec.b[j] * zs)
            U, W = _grid(len(free), m, power, mc_seed=1)
            for lo in range(0, U.shape[0], chunk):
                u = U[lo : lo + chunk]
                w = W[lo : lo + chunk]
                N = u.shape[0]
                t = np.zeros((N, D))
                logw = np.zeros((N, Z), dtype=complex)
                for col, j in enumerate(free):
                    tj = u[:, col] ** power
                    t[:, j] = tj
                    lu = np.log(u[:, col])
                    logw += (power * e[j][None, :] + power - 1) * lu[:, None]
                wt = np.exp(logw) * (w * power ** len(free))[:, None]  # (N, Z)
                G = np.zeros((N, P, Z), dtype=complex)
                for kk in range(len(rest) + 1):
                    for T in itertools.combinations(rest, kk):
                        tt = t.copy()
                        tt[:, list(S) + list(T)] = 0.0
                        logU, H, wfun = kernel(sec, tt)
                        g = np.exp(-2 * logU[:, None, None] - s[None, None, :] * np.log(H)[:, :, None])
                        if wfun is not None:
                            g = g * wfun[:, None, None]
                        G += (-1) ** len(T) * g
                        nterms += 1
                total += coef[None, :] * np.einsum("npz,nz->pz", G, wt)
    return gam[None, :] * total, nterms


def integrate(
    d: FeynmanDiagram,
    ps: Sequence[Mapping[str, Sequence[float]] | None],
    zs,
    weight: Callable[[np.ndarray], np.ndarray] | None = None,
    method: str = "polynomial",
    factor_lines: Sequence[Sequence[str]] = (),
    rtol: float = 1e-8,
    fail_tol: float = 1e-5,
    m0: int = 16,
    max_nodes: int = 400,
    max_total_nodes: int = 400_000,
    power: int = 8,
    adaptive: bool = True,
) -> IntegrationResult:
    """Regularised amplitude of ``d`` at momentum points ``ps`` and regulators ``zs``.

    Parameters
    ----------
    weight
        Optional function of the simplex point ``beta`` (``(N, n)`` in line order)
        multiplying the integrand; used for the partition of unity.
    method
        ``"polynomial"`` evaluates ``U`` and ``F`` from their monomial tables
        (supports the analytic subtraction); ``"factorized"`` evaluates them by
        nested Gaussian reduction over the components ``factor_lines`` and needs
        a regulator for which no subtraction is required.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    plan = _plan(d)
    pm = [momentum_array(d, p) for p in ps]
    if plan.n == 0:
        vals = np.full((len(ps), zs.size), plan.prefactor, dtype=complex)
        if weight is not None:
            raise GraphError("no alpha-simplex for a diagram without internal lines")
        return IntegrationResult(vals, 0.0, 0, 0, 1, 1)
    poly = graph_polynomials(d)
    kin = np.stack([poly.kinematics(p) for p in pm], axis=1) if poly.F_exps.size else np.zeros((0, len(ps)))
    gauss = None
    if method == "factorized":
        gauss = _nested_gaussian(d, pm, factor_lines)
        for sec in plan.sectors:
            if np.any(sec.c[:, None] + sec.b[:, None] * zs.real[None, :] <= -1 + 1e-12):
                raise GraphError("factorized evaluation needs a convergent regulator (no subtraction)")
    elif method != "polynomial":
        raise ValueError(f"unknown method {method!r}")
    kernel = _Kernel(plan, kin, weight, gauss)
    D = plan.n - 1
    chunk = max(256, int(2_000_000 // max(1, len(ps) * zs.size)))

    def run(m):
        def one(sec):
            return _sector_total(kernel, sec, zs, m, power, chunk)

        with ThreadPoolExecutor(max_workers=worker_count()) as ex:
            parts = list(ex.map(one, plan.sectors))
        tot = np.zeros((len(ps), zs.size), dtype=complex)
        nt = 0
        for v, k in parts:  # fixed order: deterministic reduction
            tot += v
            nt += k
        return tot * plan.prefactor, nt

    m = m0
    prev, nterms = run(m)
    levels, err = 1, math.inf
    if D == 0:
        return IntegrationResult(prev, 0.0, 0, 1, len(plan.sectors), nterms)
    while adaptive:
        m_next = int(math.ceil(1.5 * m))
        if m_next > max_nodes or (D <= MC_DIMENSION and m_next**D > max_total_nodes):
            break
        cur, nterms = run(m_next)
        levels += 1
        scale = float(np.max(np.abs(cur))) or 1.0
        err = float(np.max(np.abs(cur - prev))) / scale
        prev, m = cur, m_next
        if err < rtol:
            break
    if not adaptive:
        err = float("nan")
    elif err > fail_tol:
        raise QuadratureError(
            f"{d.name or 'diagram'}: quadrature estimate {err:.2e} above {fail_tol:.0e} "
            f"with {m} nodes per dimension"
        )
    return IntegrationResult(
        prev, err, m, levels, len(plan.sectors), nterms,
        {"power": power, "mc_seed": 1 if D > MC_DIMENSION else None},
    )


def amplitude_values(d: FeynmanDiagram, ps, zs, **kw) -> np.ndarray:
    """Shortcut returning only the ``(P, Z)`` value array."""
    return integrate(d, ps, zs, **kw).values


# --------------------------------------------------------------------------
# nested Gaussian (factorised) evaluation
# --------------------------------------------------------------------------


def _nested_gaussian(d: FeynmanDiagram, pm: Sequence[np.ndarray], groups: Sequence[Sequence[str]]):
    """Callable ``a -> (U, H)`` evaluating inner components first.

    For each group of lines (a 1PI component ``gamma``) the loop momenta of
    ``gamma`` are integrated at fixed momenta of its legs, leaving a quadratic
    form in those legs; the quotient loop momenta are integrated last.
    """
    from .subgraph import Subdiagram, quotient

    g = d.graph
    comps = []
    for grp in groups:
        ls = frozenset(grp)
        vs = frozenset(v for r in ls for v in g.internal[r])
        comps.append(Subdiagram(d, vs, ls))
    lines = list(d.internal)
    idx = {r: i for i, r in enumerate(lines)}
    m2 = np.array([d.masses[r] for r in lines]) ** 2
    q = quotient(d, comps) if comps else d
    qb = build_loop_basis(q)
    qlines = list(q.internal)
    inner = []
    for s in comps:
        sd = s.diagram
        sb = build_loop_basis(sd)
        legs = list(sd.external)
        # leg momentum in terms of quotient loop momenta and externals
        Lrow = np.zeros((len(legs), qb.L))
        Erow = np.zeros((len(legs), len(qb.externals)))
        for i, leg in enumerate(legs):
            entry = next(x for x in s.boundary if x[0] == leg)
            _, r, _, sign = entry
            if r in g.external:
                Erow[i, qb.externals.index(r)] = 1.0
            else:
                k = qlines.index(r)
                Lrow[i] = sign * qb.C[k]
                Erow[i] = sign * qb.E[k]
        inner.append((sb, [idx[r] for r in sb.lines], Lrow, Erow))

    Cq = qb.C.astype(float)
    Eq = qb.E.astype(float)
    qidx = [idx[r] for r in qlines]
    P_ext = np.stack(pm, axis=0)  # (P, n_ext, 4)

    def evaluate(a: np.ndarray):
        N = a.shape[0]
        logdet = np.zeros(N)
        Lq = qb.L
        Qo = np.einsum("ri,nr,rj->nij", Cq, a[:, qidx], Cq) if Lq else np.zeros((N, 0, 0))
        # outer linear and constant pieces as bilinear forms in the externals
        Bk = np.einsum("ri,nr,re->nie", Cq, a[:, qidx], Eq)  # (N, L, n_ext)
        Cc = np.einsum("re,nr,rf->nef", Eq, a[:, qidx], Eq)  # (N, n_ext, n_ext)
        for sb, cols, Lrow, Erow in inner:
            ai = a[:, cols]
            Ci = sb.C.astype(float)
            Ei = sb.E.astype(float)
            Qi = np.einsum("ri,nr,rj->nij", Ci, ai, Ci)
            Bi = np.einsum("ri,nr,re->nie", Ci, ai, Ei)
            Ci0 = np.einsum("re,nr,rf->nef", Ei, ai, Ei)
            sol = np.linalg.solve(Qi, Bi)
            M = Ci0 - np.einsum("nie,nif->nef", Bi, sol)  # leg quadratic form
            logdet += np.log(np.linalg.det(Qi))
            Qo = Qo + np.einsum("li,nlm,mj->nij", Lrow, M, Lrow)
            Bk = Bk + np.einsum("li,nlm,mf->nif", Lrow, M, Erow)
            Cc = Cc + np.einsum("le,nlm,mf->nef", Erow, M, Erow)
        if Lq:
            logdet += np.log(np.linalg.det(Qo))
            sol = np.linalg.solve(Qo, Bk)
            Meff = Cc - np.einsum("nie,nif->nef", Bk, sol)
        else:
            Meff = Cc
        # F/U = sum over Lorentz components of p^T Meff p
        FU = np.einsum("pem,nef,pfm->np", P_ext, Meff, P_ext)
        H = FU + (a @ m2)[:, None]
        return np.exp(logdet), H

    return evaluate


# --------------------------------------------------------------------------
# partition-weighted sector evaluation
# --------------------------------------------------------------------------


def sector_eval(
    d: FeynmanDiagram,
    A: Sequence[str] | frozenset,
    p=None,
    z=2.0,
    partition: SectorPartition | None = None,
    method: str = "direct",
    **kw,
):
    """``eta~_A``-weighted amplitude of ``d``; ``A`` is a set of internal line ids.

    ``method="factorized"`` integrates the painted 1PI components of ``A``
    first (nested Gaussian reduction), ``"direct"`` uses the full Symanzik
    polynomials.  Returns one value per regulator in ``z``.

    The weights are only C^2 across the thin shells ``beta_i ~ delta``, so the
    tensor rule converges algebraically there.  By default one fixed rule
    (``m0=48`` nodes per dimension, ``t = u^2``) is used for every ``A`` and
    both methods, which makes sums over ``A`` and method comparisons exact
    identities of the integrands at shared nodes.  Pass ``adaptive=True`` and
    larger ``max_nodes`` for more accurate individual sectors.
    """
    kw.setdefault("adaptive", False)
    kw.setdefault("m0", 48)
    kw.setdefault("power", 2)
    lines = list(d.internal)
    unknown = set(A) - set(lines)
    if unknown:
        raise GraphError(f"unknown lines {sorted(unknown)}")
    part = partition or build_partition(len(lines))
    Aidx = frozenset(lines.index(r) for r in A)

    def weight(beta):
        return part.eta_tilde(Aidx, beta)

    if method == "direct":
        res = integrate(d, [p], z, weight=weight, **kw)
    elif method == "factorized":
        comps = painted_components(d, A)
        groups = [sorted(c.lines) for c in comps]
        res = integrate(d, [p], z, weight=weight, method="factorized", factor_lines=groups, **kw)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = res.values[0]
    return out if np.ndim(z) else complex(out[0])


# --------------------------------------------------------------------------
# radial integration
# --------------------------------------------------------------------------


def _simplex_nodes(plan: _Plan, m: int, power: int):
    """Per Hepp sector: t-points, the simplex point beta and the measure factor."""
    D = plan.n - 1
    U, W = _grid(D, m, power)
    t = U**power
    jac = W * power**D * np.prod(U ** (power - 1), axis=1) if D else W
    out = []
    for sec in plan.sectors:
        a = _mono(t, sec.a_t)
        na = a.sum(axis=1)
        # t-Jacobian prod t_j^{n-j}
        j = np.arange(2, plan.n + 1)
        tj = np.prod(t ** (plan.n - j)[None, :], axis=1) if D else np.ones(1)
        out.append((sec, t, a / na[:, None], jac * tj / na**plan.n))
    return out


def _simplex_data(d: FeynmanDiagram, p, z: np.ndarray, m: int, power: int):
    """``W(beta, z)`` and ``H(beta)`` at simplex nodes for ``int d^n alpha delta(lam - |alpha|)``."""
    plan = _plan(d)
    poly = graph_polynomials(d)
    pmom = momentum_array(d, p)
    kin = poly.kinematics(pmom)
    Ws, Hs = [], []
    for sec, t, beta, meas in _simplex_nodes(plan, m, power):
        U = poly.U(beta)
        F = poly.F0(beta, pmom) if poly.F_exps.size else np.zeros(beta.shape[0])
        H = F / U + beta @ plan.m2
        logb = np.log(beta).sum(axis=1)
        W = meas[:, None] * np.exp(logb[:, None] * z[None, :]) / (U**2)[:, None]
        Ws.append(W)
        Hs.append(H)
    return np.concatenate(Ws), np.concatenate(Hs), plan


def radial_profile(d: FeynmanDiagram, p, z, lambdas, m: int = 64, power: int = 3, scale_momenta: bool = False):
    """``g(lam) = int d^n alpha delta(lam - |alpha|) I(alpha)`` on a grid of ``lam``.

    ``I`` is the regularised alpha-integrand.  With ``scale_momenta`` the
    momenta are rescaled to ``p / sqrt(lam)`` (the ``Lambda_lam`` action).
    The simplex integral must converge at ``z``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    plan = _plan(d)
    for sec in plan.sectors:
        if np.any(sec.c[:, None] + sec.b[:, None] * z.real[None, :] <= -1):
            raise GraphError("simplex integral diverges at this regulator (subdivergence)")
    lam = np.asarray(lambdas, dtype=float)
    out = np.zeros((lam.size, z.size), dtype=complex)
    n, L = plan.n, plan.L
    base = None if scale_momenta else _simplex_data(d, p, z, m, power)
    for i, l in enumerate(lam):
        if scale_momenta:
            q = None if p is None else {k: np.asarray(v, float) / math.sqrt(l) for k, v in p.items()}
            W, H, _ = _simplex_data(d, q, z, m, power)
        else:
            W, H, _ = base
        # alpha = lam beta: U -> lam^L U, F/U -> lam F/U, prod alpha^z -> lam^{nz}
        fac = l ** (n - 1 + n * z - 2 * L)
        out[i] = fac * (W * np.exp(-l * H)[:, None]).sum(axis=0)
    return out * plan.prefactor


def analytic_lambda(
    f: Callable[[np.ndarray], np.ndarray],
    taylor: Sequence,
    a: float,
    b: float,
    zs,
    cutoff: float = 1.0,
    infinite: bool = False,
    nodes: int = 64,
    power: int = 3,
):
    """``int_0^{cutoff} lam^{a + b z} f(lam) dlam`` (plus the tail when ``infinite``).

    The Taylor terms ``f_k lam^k`` are integrated exactly,
    ``f_k cutoff^{s+k} / (s+k)`` with ``s = a + b z + 1``; the remainder
    ``f - sum f_k lam^k`` is integrated numerically.  ``f`` maps an array of
    ``lam`` to an array ``(len(lam), Z)`` (or ``(len(lam),)``); ``taylor[k]``
    is a scalar or a ``(Z,)`` array.  Returns ``(values, series)`` where
    ``series`` is the exact Laurent expansion of the analytic terms when the
    Taylor data are ``z``-independent scalars (else ``None``).
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    s = a + b * zs + 1.0
    K = len(taylor)
    for k in range(K):
        if np.any(np.abs(s + k) < 1e-10):
            raise ZeroDivisionError(f"regulator sample on the pole s + {k} = 0")
    analytic = np.zeros(zs.size, dtype=complex)
    for k, fk in enumerate(taylor):
        analytic += np.asarray(fk) * cutoff ** (s + k) / (s + k)
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (x + 1)
    lam = cutoff * u**power
    jac = 0.5 * w * cutoff * power * u ** (power - 1)
    fv = np.asarray(f(lam))
    if fv.ndim == 1:
        fv = fv[:, None]
    poly = sum(np.asarray(fk) * lam[:, None] ** k for k, fk in enumerate(taylor)) if K else 0.0
    rem = fv - poly
    lampow = np.exp((s[None, :] - 1) * np.log(lam)[:, None])
    values = analytic + (jac[:, None] * lampow * rem).sum(axis=0)
    if infinite:
        # tail on [cutoff, inf) via lam = cutoff / v
        v = u**power
        lt = cutoff / v
        jt = 0.5 * w * power * u ** (power - 1) * cutoff / v**2
        ft = np.asarray(f(lt))
        if ft.ndim == 1:
            ft = ft[:, None]
        values = values + (jt[:, None] * np.exp((s[None, :] - 1) * np.log(lt)[:, None]) * ft).sum(axis=0)
    series = None
    if all(np.ndim(fk) == 0 for fk in taylor) and b != 0:
        # f_k cutoff^{s+k}/(s+k): only a pole when a + 1 + k == 0
        terms: dict[int, complex] = {}
        for k, fk in enumerate(taylor):
            if abs(a + 1 + k) < 1e-12:
                terms[-1] = terms.get(-1, 0) + complex(fk) / b
        series = LaurentSeries.from_dict(terms)
    return values, series


def lambda_split_amplitude(d: FeynmanDiagram, p, zs, cutoff: float = 1.0, order: int | None = None, m: int = 96, power: int = 3):
    """Amplitude with the radial integral split by :func:`analytic_lambda`.

    Only for diagrams whose simplex integral converges near ``z = 0`` (no
    subdivergences).  The Taylor data of ``f(lam) = sum W e^{-lam H}`` are
    ``f_k = sum W (-H)^k / k!``.
    """
    from .graph import divergence_degree

    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    W, H, plan = _simplex_data(d, p, zs, m, power)
    n, L = plan.n, plan.L
    if order is None:
        order = max(0, divergence_degree(d)) + 2
    # lam exponent: n - 1 + n z - 2L = a + b z
    a, b = n - 1 - 2 * L, n
    taylor = [((-H) ** k / math.factorial(k)) @ W for k in range(order)]

    def f(lam):
        return np.exp(-np.outer(lam, H)) @ W

    out = np.zeros(zs.size, dtype=complex)
    # taylor coefficients depend on z through W: evaluate per z column
    s = a + b * zs + 1.0
    analytic = sum(taylor[k] * cutoff ** (s + k) / (s + k) for k in range(order))
    x, w = np.polynomial.legendre.leggauss(m)
    u = 0.5 * (x + 1)
    lam = cutoff * u**power
    jac = 0.5 * w * cutoff * power * u ** (power - 1)
    y = np.outer(lam, H)
    rem = np.exp(-y)
    for k in range(order):
        rem = rem - (-y) ** k / math.factorial(k)
    lampow = np.exp((s[None, :] - 1) * np.log(lam)[:, None])
    inner = (jac[:, None] * lampow) * (rem @ W)
    out = analytic + inner.sum(axis=0)
    # tail [cutoff, inf): Gauss-Laguerre in x = (lam - cutoff) H per node
    xl, wl = np.polynomial.laguerre.laggauss(48)
    lt = cutoff + xl[:, None] / H[None, :]  # (q, nodes)
    tail = np.einsum(
        "q,qn,qnz,nz->z",
        wl,
        np.exp(-cutoff * H)[None, :] / H[None, :],
        np.exp((s[None, None, :] - 1) * np.log(lt)[:, :, None]),
        W,
    )
    return (out + tail) * plan.prefactor
