"""Closed-form spectra on spherical shells A_{r,R} = {r < |x| < R} in R^n.

Also the capacity-type cutoff (corrector) that vanishes on B_{r_eps}, equals
one outside B_eps, and is radial-harmonic in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HoleRequired, OutOfRange, RateViolation
from .geometry import ball_volume

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class ShellSpec:
    n: int
    r: float
    R: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n}")
        if not 0 <= self.r < self.R:
            raise ValueError(f"need 0 <= r < R, got r={self.r}, R={self.R}")


def sigma1_shell(s: ShellSpec) -> float:
    """First Steklov-Dirichlet eigenvalue (radial mode)."""
    n, r, R = s.n, s.r, s.R
    if r <= 0:
        raise HoleRequired("sigma_1 of the shell needs r > 0")
    if n == 2:
        return 1.0 / (R * math.log(R / r))
    return (n - 2) / (R * ((R / r) ** (n - 2) - 1.0))


def sigma2_shell(s: ShellSpec) -> float:
    """Second eigenvalue, multiplicity n; equals 1/R at r = 0."""
    n, r, R = s.n, s.r, s.R
    return (R**n + r**n * (n - 1)) / (R * (R**n - r**n))


def sigma2_shell_derivative(s: ShellSpec) -> float:
    n, r, R = s.n, s.r, s.R
    return n * n * R ** (n - 1) * r ** (n - 1) / (R**n - r**n) ** 2


def radial_eigenfunction_1(s: ShellSpec, t: float) -> float:
    """Unnormalised radial profile of the first eigenfunction at |x| = t."""
    n, r, R = s.n, s.r, s.R
    if r <= 0:
        raise HoleRequired("radial eigenfunction needs r > 0")
    if not r <= t <= R:
        raise OutOfRange(f"|x| = {t} outside [{r}, {R}]")
    if n == 2:
        return math.log(t) - math.log(r)
    return r ** (2 - n) - t ** (2 - n)


def eigenfunction_2(s: ShellSpec, x) -> np.ndarray:
    """The n eigenfunctions (1 - r^n/|x|^n) x_j of the second eigenvalue at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (s.n,):
        raise ValueError(f"point must have {s.n} coordinates")
    t = float(np.linalg.norm(x))
    if not s.r * (1 - 1e-14) <= t <= s.R * (1 + 1e-14):
        raise OutOfRange(f"|x| = {t} outside [{s.r}, {s.R}]")
    if s.r == 0:
        return x.copy()
    return (1.0 - (s.r / t) ** s.n) * x


def steklov_ball_sigma1(n: int, R: float) -> tuple[float, int]:
    """First non-trivial Steklov eigenvalue of B_R and its multiplicity."""
    if R <= 0:
        raise ValueError("R must be positive")
    return 1.0 / R, n


def sphere_area(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class CorrectorSpec:
    """Cutoff scale ``eps`` with hole radius r_eps = eps**p."""

    n: int
    eps: float
    p: float | None = None

    @property
    def rate(self) -> float:
        if self.p is not None:
            return self.p
        return 2.0 if self.n == 2 else self.n / (self.n - 2) + 1.0

    @property
    def r_eps(self) -> float:
        return self.eps**self.rate

    def check(self) -> None:
        p = self.rate
        if not 0 < self.eps < 1:
            raise RateViolation(f"eps must lie in (0, 1), got {self.eps}")
        bound = 1.0 if self.n == 2 else self.n / (self.n - 2)
        if not p > bound:
            raise RateViolation(f"r_eps = eps^{p} is not o(eps^{bound}) in dimension {self.n}")


def corrector_value(c: CorrectorSpec, t: float) -> float:
    r, eps, n = c.r_eps, c.eps, c.n
    if t <= r:
        return 0.0
    if t >= eps:
        return 1.0
    if n == 2:
        return math.log(t / r) / math.log(eps / r)
    return (r ** (2 - n) - t ** (2 - n)) / (r ** (2 - n) - eps ** (2 - n))


def _corrector_profile(c: CorrectorSpec, s: np.ndarray):
    r, eps, n = c.r_eps, c.eps, c.n
    if n == 2:
        L = math.log(eps / r)
        return np.log(s / r) / L, 1.0 / (s * L)
    D = r ** (2 - n) - eps ** (2 - n)
    return (r ** (2 - n) - s ** (2 - n)) / D, (n - 2) * s ** (1 - n) / D


def corrector_norms(c: CorrectorSpec, domain_area: float, quad_points: int = 64) -> tuple[float, float]:
    """Squared L2 norm and squared gradient L2 norm of the corrector on Omega_0.

    ``domain_area`` is the n-dimensional measure of Omega_0, which must
    contain B_eps. The transition shell is integrated in log(|x|) with
    16-point Gauss-Legendre panels.
    """
    c.check()
    panels = max(quad_points // 16, 4)
    lo, hi = math.log(c.r_eps), math.log(c.eps)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    u = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    s = np.exp(u)
    val, dval = _corrector_profile(c, s)
    surf = sphere_area(c.n)
    jac = surf * s ** (c.n - 1) * s  # ds = s du
    l2_shell = float(np.sum(wts * val**2 * jac))
    grad = float(np.sum(wts * dval**2 * jac))
    l2 = domain_area - ball_volume(c.n) * c.eps**c.n + l2_shell
    return l2, grad
