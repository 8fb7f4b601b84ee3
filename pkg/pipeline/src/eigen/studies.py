"""
Derived FEM quantities: effective diffusivity from the curvature of f at p = 0,
and mesh-convergence studies at a fixed tilt.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.eigen.assembly import AssembledSystem, assemble_operators
from src.eigen.solver import SolverOptions, principal_eigenvalue
from src.eigen.tilt import TiltVector
from src.geometry.cell import CellSpec
from src.geometry.mesher import Mesh, build_cell_mesh
from src.utils.errors import ConfigurationError
from src.utils.logger import get_logger


def effective_diffusivity_fem(mesh: Mesh, probe: float = 1e-2, options: Optional[SolverOptions] = None,
                              system: Optional[AssembledSystem] = None) -> float:
    """
    κ_eff from f(r e_x) = κ r² + c r⁴ + …, Richardson-extrapolated over the probes r and 2r.
    """
    if not probe > 0.0:
        raise ConfigurationError(f"probe must be positive, got {probe}")
    system = system or assemble_operators(mesh)
    options = options or SolverOptions()
    estimates = []
    for radius in (probe, 2.0 * probe):
        result = principal_eigenvalue(system, TiltVector(radius, 0.0), options=options)
        estimates.append(result.f / radius ** 2)
    kappa = (4.0 * estimates[0] - estimates[1]) / 3.0
    get_logger().debug(f"κ_eff probes {estimates[0]:.8f}, {estimates[1]:.8f} -> {kappa:.8f}")
    return float(kappa)


@dataclass
class ConvergenceStudy:
    tilt: TiltVector
    mesh_sizes: List[float]
    values: List[float]
    n_dofs: List[int] = field(default_factory=list)

    @property
    def differences(self) -> np.ndarray:
        return np.abs(np.diff(self.values))

    @property
    def observed_order(self) -> float:
        """log2 of successive difference ratios on the three finest meshes (halving h each time)."""
        if len(self.values) < 3:
            return float('nan')
        coarse, fine = self.differences[-2:]
        if fine == 0.0:
            return float('inf')
        return math.log2(coarse / fine)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tilt': [self.tilt.p, self.tilt.q],
            'mesh_sizes': list(self.mesh_sizes),
            'values': list(self.values),
            'n_dofs': list(self.n_dofs),
            'observed_order': self.observed_order,
        }


def convergence_study(spec: CellSpec, h_list: Sequence[float], tilt: TiltVector,
                      options: Optional[SolverOptions] = None, **mesh_kwargs) -> ConvergenceStudy:
    """Solve f(tilt) on the meshes for each h (coarse to fine)."""
    h_list = sorted((float(h) for h in h_list), reverse=True)
    if len(h_list) < 2:
        raise ConfigurationError("a convergence study needs at least two mesh sizes")
    logger = get_logger()
    values, n_dofs = [], []
    for h in h_list:
        system = assemble_operators(build_cell_mesh(spec, h, **mesh_kwargs))
        result = principal_eigenvalue(system, tilt, options=options)
        values.append(result.f)
        n_dofs.append(system.n_dofs)
        logger.info(f"🔍 h={h:.4g}: f={result.f:.10f} ({system.n_dofs} dofs)")
    study = ConvergenceStudy(tilt, h_list, values, n_dofs)
    logger.info(f"📊 Observed order {study.observed_order:.3f}")
    return study
