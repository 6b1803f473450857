"""Unbalanced Beckman transport barycenters on pixel grids."""

from ._core import (
    ConfigError,
    Error,
    InputError,
    IoError,
    barycentric_transform,
    check_step_sizes,
    divergence,
    divergence_adjoint,
    emd_1d,
    laplacian_max_eig,
    mi_pairwise,
    mi_param_output,
    read_pnm,
    rotate_bilinear,
    shrink_l1,
    shrink_l21,
    solve_barycenter,
    solve_distance,
    write_pnm,
)

__all__ = [
    "ConfigError",
    "Error",
    "InputError",
    "IoError",
    "barycentric_transform",
    "check_step_sizes",
    "divergence",
    "divergence_adjoint",
    "emd_1d",
    "laplacian_max_eig",
    "mi_pairwise",
    "mi_param_output",
    "read_pnm",
    "rotate_bilinear",
    "shrink_l1",
    "shrink_l21",
    "solve_barycenter",
    "solve_distance",
    "write_pnm",
]
