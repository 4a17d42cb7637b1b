"""Run configuration shared by the library entry points and the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .laurent import SCHEMES, z_circle

__all__ = ["RunConfig"]


@dataclass(frozen=True)
class RunConfig:
    """Numerical and reporting settings.

    Attributes
    ----------
    scheme : ``"paper"`` (T keeps the constant term) or ``"minimal"``.
    z_radius, z_samples : the regulator circle.
    tol_fit : largest accepted Laurent-fit residual.
    tol_finite : relative bound on negative-exponent coefficients.
    rtol_quad : target relative change between quadrature levels.
    max_nodes : quadrature nodes per dimension (cap).
    seed : seeds every random choice (Taylor directions, Monte-Carlo rules).
    fmt : report format, ``"text"`` or ``"json"`` (JSON lines).
    max_lines : enumeration cap on internal lines.
    subtract : ``False`` disables all counterterms (debugging).
    taylor_radius : largest ``p^2`` used by the Taylor projector (in units of the smallest mass squared).
    taylor_nodes : number of ``p^2`` nodes used by the Taylor projector.
    """

    scheme: str = "paper"
    z_radius: float = 0.1
    z_samples: int = 32
    tol_fit: float = 1e-8
    tol_finite: float = 1e-4
    rtol_quad: float = 1e-8
    max_nodes: int = 400
    seed: int = 0
    fmt: str = "text"
    max_lines: int = 12
    subtract: bool = True
    taylor_radius: float = 0.25
    taylor_nodes: int = 9

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.fmt not in ("text", "json"):
            raise ValueError("fmt must be 'text' or 'json'")
        for name in ("z_radius", "tol_fit", "tol_finite", "rtol_quad", "taylor_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("z_samples", "max_nodes", "max_lines", "taylor_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.z_samples % 2 or self.z_samples < 8:
            raise ValueError("z_samples must be even and at least 8")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def zs(self):
        return z_circle(self.z_radius, self.z_samples)

    def key(self) -> tuple:
        """Fields that affect numerical results (not the report format)."""
        d = asdict(self)
        d.pop("fmt")
        return tuple(sorted(d.items()))

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)
