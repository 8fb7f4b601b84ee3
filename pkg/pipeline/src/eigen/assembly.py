"""
Linear finite-element assembly of the tilted cell problem.

For periodic φ the principal eigenpair solves

    (f − |p|²) M φ = −(K + B(p)) φ,
    K_ij = ∫ ∇φ_j·∇v_i,   M_ij = ∫ φ_j v_i,   B_ij = ∫ p·(∇φ_j v_i − ∇v_i φ_j),

with B(p) = p B_x + q B_y. K, B_x, B_y and M are assembled once per mesh, so a
sweep over p only forms the pencil −K − B(p) + |p|² M.
"""

import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from src.eigen.tilt import TiltVector
from src.geometry.mesher import Mesh, validate_mesh
from src.utils.errors import MeshingError
from src.utils.logger import get_logger


@dataclass(frozen=True, eq=False)
class PeriodicMap:
    """Identification of periodic vertices: vertex values = prolongation @ dof values."""

    prolongation: sparse.csr_matrix
    vertex_dof: np.ndarray

    @property
    def n_dofs(self) -> int:
        return self.prolongation.shape[1]


def periodic_dof_map(mesh: Mesh) -> PeriodicMap:
    """Merge paired vertices (the four cell corners collapse to one dof) via connected components."""
    n = mesh.n_vertices
    pairs = mesh.periodic_pairing
    graph = sparse.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    n_dofs, labels = connected_components(graph, directed=False)
    prolongation = sparse.csr_matrix((np.ones(n), (np.arange(n), labels)), shape=(n, n_dofs))
    return PeriodicMap(prolongation=prolongation, vertex_dof=labels)


def element_gradients(mesh: Mesh) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Triangle areas and the constant gradients (gx, gy) of the three hat functions."""
    v = mesh.vertices[mesh.triangles]
    x, y = v[:, :, 0], v[:, :, 1]
    twice_area = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    gx = np.column_stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]]) / twice_area[:, None]
    gy = np.column_stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]]) / twice_area[:, None]
    return 0.5 * twice_area, gx, gy


def assemble_vertex_matrices(mesh: Mesh) -> Tuple[sparse.csr_matrix, ...]:
    """Vertex-level (K, B_x, B_y, M) before periodic identification."""
    area, gx, gy = element_gradients(mesh)
    n = mesh.n_vertices
    rows = np.repeat(mesh.triangles[:, :, None], 3, axis=2).ravel()
    cols = np.repeat(mesh.triangles[:, None, :], 3, axis=1).ravel()

    local_k = area[:, None, None] * (gx[:, :, None] * gx[:, None, :] + gy[:, :, None] * gy[:, None, :])
    local_m = area[:, None, None] / 12.0 * (np.ones((3, 3)) + np.eye(3))[None, :, :]
    # ∫ v_i = area/3, so the drift block is (area/3)(g_j − g_i): skew by construction
    local_bx = (area / 3.0)[:, None, None] * (gx[:, None, :] - gx[:, :, None])
    local_by = (area / 3.0)[:, None, None] * (gy[:, None, :] - gy[:, :, None])

    def build(local):
        return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    return build(local_k), build(local_bx), build(local_by), build(local_m)


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Periodic FEM operators on one mesh, bound to a tilt vector."""

    stiffness: sparse.csr_matrix
    drift_x: sparse.csr_matrix
    drift_y: sparse.csr_matrix
    mass: sparse.csr_matrix
    dof_map: PeriodicMap
    mesh: Mesh
    tilt: TiltVector = TiltVector()

    @property
    def n_dofs(self) -> int:
        return self.mass.shape[0]

    @property
    def skew_drift(self) -> sparse.csr_matrix:
        return self.drift(self.tilt)

    def drift(self, tilt: TiltVector) -> sparse.csr_matrix:
        return (tilt.p * self.drift_x + tilt.q * self.drift_y).tocsr()

    def at(self, tilt: TiltVector) -> 'AssembledSystem':
        return dataclasses.replace(self, tilt=tilt)

    def pencil(self, tilt: Optional[TiltVector] = None) -> sparse.csr_matrix:
        """Left-hand operator A(p) = −K − B(p) + |p|² M of the pencil (A, M)."""
        tilt = self.tilt if tilt is None else tilt
        return (-self.stiffness - self.drift(tilt) + tilt.norm_sq * self.mass).tocsr()

    def area(self) -> float:
        return float(self.mass.sum())

    def to_vertex_values(self, dof_values: np.ndarray) -> np.ndarray:
        return self.dof_map.prolongation @ dof_values


def assemble_operators(mesh: Mesh, validate: bool = True) -> AssembledSystem:
    """Assemble K, B_x, B_y, M with periodic identification; the returned system has p = 0."""
    if validate:
        audit = validate_mesh(mesh)
        if not audit.ok:
            raise MeshingError(f"mesh validation failed: {'; '.join(audit.problems)}")
    dof_map = periodic_dof_map(mesh)
    prolongation = dof_map.prolongation
    restricted = [(prolongation.T @ matrix @ prolongation).tocsr() for matrix in assemble_vertex_matrices(mesh)]
    stiffness, drift_x, drift_y, mass = restricted
    # Restriction sums entries in an arbitrary order; re-skew so B^T = -B holds bitwise
    drift_x = (0.5 * (drift_x - drift_x.T)).tocsr()
    drift_y = (0.5 * (drift_y - drift_y.T)).tocsr()
    get_logger().debug(f"Assembled {dof_map.n_dofs} dofs from {mesh.n_vertices} vertices")
    return AssembledSystem(stiffness, drift_x, drift_y, mass, dof_map, mesh)


def assemble(mesh: Mesh, tilt: TiltVector) -> AssembledSystem:
    return assemble_operators(mesh).at(tilt)


@dataclass(frozen=True, eq=False)
class TiltedSystem:
    """
    Petrov–Galerkin discretisation of ∇²ψ = fψ with ψ(x + r) = e^{−p·r}ψ(x).

    Trial functions are e^{−p·x}φ_j and test functions e^{p·x}v_i with φ_j, v_i the
    periodic hats, so every trial function carries the tilted periodicity exactly.
    `trial` maps dof values to ψ at the mesh vertices.
    """

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    trial: sparse.csr_matrix
    tilt: TiltVector

    @property
    def n_dofs(self) -> int:
        return self.mass.shape[0]

    def pencil(self) -> sparse.csr_matrix:
        return (-self.stiffness).tocsr()


def assemble_tilted(mesh: Mesh, tilt: TiltVector) -> TiltedSystem:
    dof_map = periodic_dof_map(mesh)
    area, gx, gy = element_gradients(mesh)
    n = mesh.n_vertices
    rows = np.repeat(mesh.triangles[:, :, None], 3, axis=2).ravel()
    cols = np.repeat(mesh.triangles[:, None, :], 3, axis=1).ravel()

    # ∫ ∇(e^{p·x}v_i)·∇(e^{−p·x}φ_j) = ∫ (∇v_i + p v_i)·(∇φ_j − p φ_j); the exponentials cancel
    tilted_gradient = tilt.p * gx + tilt.q * gy
    local_m = area[:, None, None] / 12.0 * (np.ones((3, 3)) + np.eye(3))[None, :, :]
    local_k = (area[:, None, None] * (gx[:, :, None] * gx[:, None, :] + gy[:, :, None] * gy[:, None, :])
               + (area / 3.0)[:, None, None] * (tilted_gradient[:, None, :] - tilted_gradient[:, :, None])
               - tilt.norm_sq * local_m)

    prolongation = dof_map.prolongation
    stiffness = sparse.coo_matrix((local_k.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mass = sparse.coo_matrix((local_m.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    weights = sparse.diags(np.exp(-(mesh.vertices @ tilt.as_array())))
    return TiltedSystem(
        stiffness=(prolongation.T @ stiffness @ prolongation).tocsr(),
        mass=(prolongation.T @ mass @ prolongation).tocsr(),
        trial=(weights @ prolongation).tocsr(),
        tilt=tilt,
    )
