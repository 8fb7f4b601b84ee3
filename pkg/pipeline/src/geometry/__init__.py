"""
Geometry package: periodic cell / astroid specifications and their triangulations.
"""

from .cell import (
    ASTROID_AREA,
    CELL_AREA,
    AstroidSpec,
    CellSpec,
    CellVariant,
    area_fraction,
    astroid_halfwidth,
    epsilon_from_sigma,
    gap_halfwidth,
    gap_halfwidth_parabolic,
    sigma_from_epsilon,
)
from .mesher import BOUNDARY_TAGS, Mesh, MeshAudit, build_astroid_mesh, build_cell_mesh, validate_mesh
from .mesh_io import read_mesh, write_mesh

__all__ = [
    'ASTROID_AREA', 'CELL_AREA', 'AstroidSpec', 'CellSpec', 'CellVariant', 'area_fraction',
    'astroid_halfwidth', 'epsilon_from_sigma', 'gap_halfwidth', 'gap_halfwidth_parabolic',
    'sigma_from_epsilon', 'BOUNDARY_TAGS', 'Mesh', 'MeshAudit', 'build_astroid_mesh',
    'build_cell_mesh', 'validate_mesh', 'read_mesh', 'write_mesh',
]
