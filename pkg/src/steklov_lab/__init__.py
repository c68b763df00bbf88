"""Finite element lab for Steklov and Steklov-Dirichlet eigenvalues on
perforated planar domains, with closed-form shell references."""

from .eigensolve import Mode, SpectralResult, friedrich_constant, solve_steklov, solve_steklov_dirichlet
from .geometry import Disk, DomainSpec, Ellipse, Marker, Mesh, StarShaped, build_polar_mesh
from .shells import CorrectorSpec, ShellSpec, sigma1_shell, sigma2_shell

__all__ = [
    "CorrectorSpec",
    "Disk",
    "DomainSpec",
    "Ellipse",
    "Marker",
    "Mesh",
    "Mode",
    "ShellSpec",
    "SpectralResult",
    "StarShaped",
    "build_polar_mesh",
    "friedrich_constant",
    "sigma1_shell",
    "sigma2_shell",
    "solve_steklov",
    "solve_steklov_dirichlet",
]
