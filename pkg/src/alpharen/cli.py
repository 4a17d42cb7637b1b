"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 finiteness certification
failure, 3 numerical failure (quadrature, Laurent fit, unsupported divergence).
"""

from __future__ import annotations

import functools
import json
import math
import sys
from typing import Any

import click
import numpy as np

from . import __version__
from .config import RunConfig
from .graph import FeynmanDiagram, GraphError, divergence_degree, is_1pi, is_connected, loop_count
from .io import DiagramFileError, parse_diagram_file, parse_point
from .laurent import LaurentFitError, LaurentSeries, fit_laurent
from .library import random_1pi_diagram, random_momenta
from .parametric import fit_min_eigenvalue_constant, max_principle_check
from .renorm import CountertermMemo, UnsupportedInsertion, compute_counterterm, renormalize
from .sector import QuadratureError, UnsupportedDivergence, integrate
from .subgraph import enumerate_1pi_subdiagrams, enumerate_disjoint_families

__all__ = ["main", "cli", "EXIT_OK", "EXIT_USAGE", "EXIT_UNCERTIFIED", "EXIT_NUMERICAL"]

EXIT_OK, EXIT_USAGE, EXIT_UNCERTIFIED, EXIT_NUMERICAL = 0, 1, 2, 3
_NUMERICAL = (QuadratureError, LaurentFitError, UnsupportedDivergence, UnsupportedInsertion, ArithmeticError)


# --------------------------------------------------------------------------
# reporting
# --------------------------------------------------------------------------


def _f(x: float) -> str:
    return f"{x:+.12e}"


def _c(x: complex) -> list[float]:
    return [float(np.real(x)), float(np.imag(x))]


class Report:
    """Collects records and writes them as text or JSON lines."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    def emit(self, record: dict[str, Any], text: str) -> None:
        if self.cfg.fmt == "json":
            click.echo(json.dumps(record, sort_keys=True, separators=(",", ":")))
        else:
            click.echo(text)


def _series_record(s: LaurentSeries) -> dict[str, Any]:
    return {"coefficients": {str(k): _c(c) for k, c in s.items()}, "residual": s.residual}


def _series_lines(s: LaurentSeries, indent: str = "  ", other: LaurentSeries | None = None, labels=("re", "im")) -> list[str]:
    head = f"{indent}{'k':>3}  {labels[0]:>20}  {labels[1]:>20}"
    if other is not None:
        head += f"  {'R~ re':>20}"
    out = [head]
    ks = [k for k, _ in s.items()]
    if other is not None:
        ks = sorted(set(ks) | {k for k, _ in other.items()})
    for k in ks:
        c = s[k] if k >= s.min_exponent else 0.0
        line = f"{indent}{k:>3}  {_f(np.real(c)):>20}  {_f(np.imag(c)):>20}"
        if other is not None:
            line += f"  {_f(np.real(other[k] if k >= other.min_exponent else 0.0)):>20}"
        out.append(line)
    return out


def _poly_text(mono) -> str:
    return "*".join(f"p_{a}.p_{b}" for a, b in mono) or "1"


# --------------------------------------------------------------------------
# options
# --------------------------------------------------------------------------


def _config_options(f):
    opts = [
        click.option("--scheme", type=click.Choice(["paper", "minimal"]), default="paper", show_default=True,
                     help="T keeps the constant term (paper) or only poles (minimal)."),
        click.option("--z-radius", type=float, default=0.1, show_default=True, help="Radius of the regulator circle."),
        click.option("--z-samples", type=int, default=32, show_default=True, help="Samples on the regulator circle."),
        click.option("--tol-fit", type=float, default=1e-8, show_default=True, help="Largest Laurent-fit residual."),
        click.option("--tol-finite", type=float, default=1e-4, show_default=True,
                     help="Relative bound on surviving pole coefficients."),
        click.option("--rtol-quad", type=float, default=1e-8, show_default=True, help="Quadrature refinement target."),
        click.option("--max-nodes", type=int, default=400, show_default=True, help="Quadrature nodes per dimension cap."),
        click.option("--seed", type=int, default=0, show_default=True, help="Seed for every random choice."),
        click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True,
                     help="Report format (json = one JSON object per line)."),
        click.option("--max-lines", type=int, default=12, show_default=True, help="Subdiagram enumeration cap."),
    ]
    for o in reversed(opts):
        f = o(f)

    @functools.wraps(f)
    def wrapper(*args, scheme, z_radius, z_samples, tol_fit, tol_finite, rtol_quad, max_nodes, seed, fmt, max_lines, **kw):
        subtract = not kw.pop("no_subtract", False)
        try:
            cfg = RunConfig(
                scheme=scheme, z_radius=z_radius, z_samples=z_samples, tol_fit=tol_fit, tol_finite=tol_finite,
                rtol_quad=rtol_quad, max_nodes=max_nodes, seed=seed, fmt=fmt, max_lines=max_lines, subtract=subtract,
            )
        except ValueError as exc:
            raise click.UsageError(str(exc)) from None
        return f(*args, cfg=cfg, **kw)

    return wrapper


def _points(d: FeynmanDiagram, specs) -> list:
    if not specs:
        return [None]
    try:
        return [parse_point(s, d) for s in specs]
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _point_text(p) -> str:
    if not p:
        return "p=0"
    return "; ".join(f"{e}=({', '.join(f'{x:g}' for x in v)})" for e, v in p.items())


_diagram_arg = click.argument("diagram_file", type=click.Path(dir_okay=False))
_point_opt = click.option(
    "--point", "points", multiple=True, metavar="SPEC",
    help="External momenta, e.g. 'e1=0.5' or 'e1=1,0,0,0;e2=-1,0,0,0' (repeatable; default p=0).",
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="alpharen")
def cli():
    """Analytically regularised Feynman amplitudes and the recursive R-operation."""


@cli.command()
@_diagram_arg
@_config_options
def validate(diagram_file, cfg):
    """Parse a diagram file and report its structure."""
    d = parse_diagram_file(diagram_file)
    g = d.graph
    conn = is_connected(g)
    pi = is_1pi(g)
    rec = {
        "command": "validate", "diagram": d.name, "vertices": len(g.vertices), "internal": len(g.internal),
        "external": len(g.external), "connected": conn, "one_pi": pi, "loops": loop_count(g) if conn else None,
    }
    Report(cfg).emit(rec, "\n".join([
        f"diagram: {d.name}",
        f"vertices: {len(g.vertices)}  internal lines: {len(g.internal)}  external lines: {len(g.external)}",
        f"connected: {'yes' if conn else 'no'}",
        f"1PI: {'yes' if pi else 'no'}",
        f"loops: {rec['loops'] if conn else 'n/a'}",
    ]))
    return EXIT_OK


@cli.command("power-count")
@_diagram_arg
@_config_options
def power_count(diagram_file, cfg):
    """Superficial degree of divergence, also as a function of the regulator."""
    d = parse_diagram_file(diagram_file)
    om = divergence_degree(d)
    n = len(d.internal)
    rec = {"command": "power-count", "diagram": d.name, "omega": om, "omega_z": {"constant": om, "z": -2 * n}}
    zpart = f" - {2 * n}z" if n else ""
    Report(cfg).emit(rec, f"diagram: {d.name}\nOmega={om}\nOmega(z)={om}{zpart}")
    return EXIT_OK


@cli.command()
@_diagram_arg
@click.option("--families", is_flag=True, help="Also list the families of disjoint subdiagrams.")
@_config_options
def subdiagrams(diagram_file, families, cfg):
    """Proper 1PI subdiagrams with their degrees of divergence."""
    d = parse_diagram_file(diagram_file)
    subs = enumerate_1pi_subdiagrams(d, cfg.max_lines)
    rep = Report(cfg)
    rep.emit({"command": "subdiagrams", "diagram": d.name, "count": len(subs)},
             f"diagram: {d.name}\nproper 1PI subdiagrams: {len(subs)}")
    for s in subs:
        om = divergence_degree(s.diagram)
        vs, ls = s.key
        rep.emit(
            {"vertices": list(vs), "lines": list(ls), "omega": om},
            f"  vertices={','.join(vs)}  lines={','.join(ls)}  Omega={om}",
        )
    if families:
        fams = enumerate_disjoint_families(d, cfg.max_lines, subs)
        rep.emit({"families": len(fams)}, f"families: {len(fams)}")
        for fam in fams:
            rep.emit({"family": [list(s.key[1]) for s in fam]},
                     "  " + " | ".join(",".join(s.key[1]) for s in fam))
    return EXIT_OK


def _report_counterterm(rep: Report, ct, label: str):
    rep.emit(
        {"counterterm": label, "omega": ct.omega, "scheme": ct.scheme, "terms": len(ct.terms)},
        f"counterterm: {label}  Omega={ct.omega}  scheme={ct.scheme}  terms={len(ct.terms)}",
    )
    for t in ct.terms:
        rec = {"m": list(t.m), "polynomial": _poly_text(t.monomial), **_series_record(t.coeff)}
        lines = [f"  m=({','.join(map(str, t.m))})  P={_poly_text(t.monomial)}"] + _series_lines(t.coeff, "    ")
        rep.emit(rec, "\n".join(lines))


@cli.command()
@_diagram_arg
@_config_options
def counterterm(diagram_file, cfg):
    """Local counterterm of a 1PI diagram and of its divergent subdiagrams."""
    d = parse_diagram_file(diagram_file)
    memo = CountertermMemo()
    ct = compute_counterterm(d, cfg, memo)
    rep = Report(cfg)
    subs = sorted(
        (k[0] for k, v in memo.items() if k[0] != d and v.terms),
        key=lambda s: (len(s.vertices), len(s.internal), tuple(s.vertices), tuple(s.internal)),
    )
    for s in subs:
        _report_counterterm(rep, memo[(s, cfg.key())], f"{d.name}[{','.join(s.internal)}]")
    _report_counterterm(rep, ct, d.name)
    return EXIT_OK


@cli.command()
@_diagram_arg
@_point_opt
@_config_options
def evaluate(diagram_file, points, cfg):
    """Laurent table of the bare regularised amplitude."""
    d = parse_diagram_file(diagram_file)
    ps = _points(d, points)
    res = integrate(d, ps, cfg.zs, rtol=cfg.rtol_quad, max_nodes=cfg.max_nodes)
    L = loop_count(d.graph) if is_connected(d.graph) else 0
    window = (-2 * max(L, 1), 2)
    rep = Report(cfg)
    rep.emit(
        {"command": "evaluate", "diagram": d.name, "quadrature_error": res.error, "nodes_per_dim": res.nodes_per_dim},
        f"diagram: {d.name}\nquadrature: {res.nodes_per_dim} nodes/dim, estimate {res.error:.2e}",
    )
    for p, v in zip(ps, res.values):
        s = fit_laurent((cfg.zs, v), window, tol=cfg.tol_fit)
        rep.emit({"point": p or {}, **_series_record(s)},
                 "\n".join([f"point: {_point_text(p)}  (fit residual {s.residual:.2e})"] + _series_lines(s)))
    return EXIT_OK


@cli.command("verify-finite")
@_diagram_arg
@_point_opt
@click.option("--no-subtract", is_flag=True, help="Debug: disable every counterterm.")
@_config_options
def verify_finite(diagram_file, points, cfg):
    """Full R-operation with finiteness certification (exit 2 when it fails)."""
    d = parse_diagram_file(diagram_file)
    ps = _points(d, points)
    r = renormalize(d, ps, cfg)
    rep = Report(cfg)
    rep.emit(
        {"command": "verify-finite", "diagram": d.name, "scheme": cfg.scheme, "subtract": cfg.subtract},
        f"diagram: {d.name}\nscheme: {cfg.scheme}{'' if cfg.subtract else '  (subtraction disabled)'}",
    )
    for p, s, rt, ok, ratio in zip(ps, r.series, r.rtilde, r.certified, r.ratios):
        poles = {str(k): abs(c) for k, c in s.items() if k < 0}
        rec = {"point": p or {}, "certified": ok, "pole_ratio": ratio, "poles": poles,
               **_series_record(s), "rtilde": _series_record(rt)}
        status = "certified" if ok else "NOT certified"
        lines = [f"point: {_point_text(p)}"] + _series_lines(s, other=rt, labels=("R re", "R im"))
        lines.append(f"  {status}: max pole / scale = {ratio:.3e} (tolerance {cfg.tol_finite:.1e})")
        if not ok:
            worst = max(poles, key=lambda k: poles[k])
            lines.append(f"  largest surviving pole: z^{worst} with |a| = {poles[worst]:.6e}")
        rep.emit(rec, "\n".join(lines))
    return EXIT_OK if r.finite else EXIT_UNCERTIFIED


@cli.command("kirchhoff-check")
@click.argument("diagram_file", type=click.Path(dir_okay=False), required=False)
@click.option("--random", "n_random", type=int, default=0, help="Check this many random 1PI diagrams instead.")
@click.option("--draws", type=int, default=50, show_default=True, help="Random alpha draws per diagram.")
@_config_options
def kirchhoff_check(diagram_file, n_random, draws, cfg):
    """Maximum principle and minimum-eigenvalue bound for the line-current problem."""
    if (diagram_file is None) == (n_random <= 0):
        raise click.UsageError("give either a diagram file or --random N")
    rng = np.random.default_rng(cfg.seed)
    ds = [parse_diagram_file(diagram_file)] if diagram_file else [random_1pi_diagram(rng) for _ in range(n_random)]
    rep = Report(cfg)
    all_ok = True
    for i, d in enumerate(ds):
        worst = 0.0
        mp_ok = True
        for _ in range(draws):
            alpha = np.exp(rng.uniform(-4, 4, len(d.internal)))
            p = random_momenta(rng, d)
            q, C, ok = max_principle_check(d, alpha, p)
            worst = max(worst, q / C if C else (0.0 if q == 0 else math.inf))
            mp_ok &= ok
        c_fit, stab = fit_min_eigenvalue_constant(d, draws, int(rng.integers(2**31)))
        eig_ok = bool(c_fit > 0 and stab < 1.5)
        ok = mp_ok and eig_ok
        all_ok &= ok
        label = d.name if diagram_file else f"#{i + 1} {d.name}"
        rep.emit(
            {"diagram": d.name, "index": i, "max_principle": mp_ok, "max_ratio": worst, "c_fit": c_fit,
             "c_stability": stab, "passed": ok},
            f"{label}: max |q|/C = {worst:.4e} ({'ok' if mp_ok else 'FAIL'}); "
            f"C_fit = {c_fit:.6e}, halves ratio = {stab:.4f} ({'ok' if eig_ok else 'FAIL'})",
        )
    rep.emit({"passed": all_ok, "diagrams": len(ds)}, f"summary: {'all passed' if all_ok else 'FAILURES'} ({len(ds)} diagrams)")
    return EXIT_OK if all_ok else EXIT_UNCERTIFIED


def main(argv: list[str] | None = None) -> int:
    """Entry point returning the exit status."""
    try:
        rv = cli.main(args=argv, prog_name="alpharen", standalone_mode=False)
    except click.exceptions.NoArgsIsHelpError as exc:  # pragma: no cover - click >= 8.2
        click.echo(exc.ctx.get_help())
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (DiagramFileError, GraphError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except _NUMERICAL as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERICAL
    except click.Abort:
        return EXIT_USAGE
    return EXIT_OK if rv is None else int(rv)


def entry() -> None:
    sys.exit(main())
