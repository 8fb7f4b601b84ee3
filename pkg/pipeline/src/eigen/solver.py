"""
Shift-and-invert computation of the principal eigenpair.

The pencil (A, M) has its rightmost eigenvalue f(p) in [0, |p|²], so a shift
σ = |p|² + offset makes f the eigenvalue nearest to σ. Right and left vectors are
iterated together on one sparse LU factorisation of A − σM; the two-sided
Rayleigh quotient gives f with an error quadratic in both vector errors.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import norm as sparse_norm, splu

from src.eigen.assembly import AssembledSystem, TiltedSystem
from src.eigen.tilt import TiltVector
from src.utils.errors import ConvergenceError
from src.utils.logger import get_logger


@dataclass
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 200
    shift_offset: float = 0.1
    refine_shift: bool = True
    refine_threshold: float = 1e-3
    refine_offset: float = 1e-6
    max_refinements: int = 3
    stagnation_window: int = 50
    max_shift_perturbations: int = 5
    positivity_tolerance: float = 1e-6

    @classmethod
    def from_config(cls, solver_config: Optional[Dict[str, Any]]) -> 'SolverOptions':
        known = {key: value for key, value in (solver_config or {}).items() if key in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class EigenResult:
    tilt: TiltVector
    f: float
    eigenvector: np.ndarray
    residual: float
    iterations: int
    shift: float
    left_eigenvector: Optional[np.ndarray] = field(default=None, repr=False)

    def is_single_signed(self, tolerance: float = 1e-6) -> bool:
        vector = self.eigenvector
        return bool(np.min(vector) >= -tolerance * np.max(np.abs(vector)))


def _factorise(matrix: sparse.csr_matrix, mass: sparse.csr_matrix, shift: float, max_perturbations: int):
    """splu of (A − σM); an exactly singular factorisation nudges σ upwards and retries."""
    perturbation = 1e-8 * (1.0 + abs(shift))
    for attempt in range(max_perturbations + 1):
        try:
            return splu((matrix - shift * mass).tocsc()), shift
        except RuntimeError as e:
            get_logger().debug(f"Shift {shift:.12g} gives a singular factorisation ({e}); perturbing")
            shift += perturbation
            perturbation *= 10.0
    raise ConvergenceError(f"could not factorise the shifted pencil near sigma={shift:.6g}")


def shift_invert_iteration(matrix: sparse.csr_matrix, mass: sparse.csr_matrix, shift: float,
                           options: SolverOptions, start: Optional[np.ndarray] = None,
                           left_start: Optional[np.ndarray] = None):
    """
    Two-sided inverse iteration on (A − σM)⁻¹M with Rayleigh shift refinement.

    Returns (eigenvalue, right vector, left vector, backward-error residual, iterations, final shift).
    """
    n = matrix.shape[0]
    x = np.ones(n) if start is None else np.array(start, dtype=float)
    y = np.ones(n) if left_start is None else np.array(left_start, dtype=float)
    scale = sparse_norm(matrix, 1)
    mass_scale = sparse_norm(mass, 1)

    lu, shift = _factorise(matrix, mass, shift, options.max_shift_perturbations)
    refinements = 0
    since_refinement = 0
    eigenvalue, residual = shift, np.inf

    for iteration in range(1, options.max_iterations + 1):
        x = lu.solve(mass @ x)
        y = lu.solve(mass.T @ y, trans='T')
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)

        ax, mx = matrix @ x, mass @ x
        denominator = y @ mx
        eigenvalue = (y @ ax) / denominator if abs(denominator) > 1e-14 else (x @ ax) / (x @ mx)
        residual = np.linalg.norm(ax - eigenvalue * mx) / (scale + abs(eigenvalue) * mass_scale)
        since_refinement += 1

        if residual <= options.tolerance:
            return eigenvalue, x, y, residual, iteration, shift

        stagnating = since_refinement >= options.stagnation_window
        if options.refine_shift and refinements < options.max_refinements and \
                (residual < options.refine_threshold or stagnating):
            new_shift = eigenvalue + options.refine_offset * (1.0 + abs(eigenvalue))
            get_logger().debug(f"Refining shift {shift:.10g} -> {new_shift:.10g} at residual {residual:.2e}")
            lu, shift = _factorise(matrix, mass, new_shift, options.max_shift_perturbations)
            refinements += 1
            since_refinement = 0

    raise ConvergenceError(
        f"inverse iteration stopped after {options.max_iterations} iterations at residual {residual:.3e}",
        residual=float(residual), iterations=options.max_iterations, last_iterate=(eigenvalue, x),
    )


def _normalise(vector: np.ndarray, mass: sparse.csr_matrix) -> np.ndarray:
    """Unit mass-norm, positive mean."""
    vector = vector / np.sqrt(abs(vector @ (mass @ vector)))
    if np.sum(mass @ vector) < 0.0:
        vector = -vector
    return vector


def principal_eigenvalue(system: AssembledSystem, tilt: Optional[TiltVector] = None,
                         shift_guess: Optional[float] = None, options: Optional[SolverOptions] = None,
                         start: Optional[np.ndarray] = None,
                         left_start: Optional[np.ndarray] = None) -> EigenResult:
    """
    Principal eigenpair of (−K − B(p) + |p|²M, M).

    A warm-start shift that converges onto a sign-changing (non-principal) vector is
    retried once from the default shift |p|² + offset.
    """
    options = options or SolverOptions()
    tilt = system.tilt if tilt is None else tilt
    matrix = system.pencil(tilt)
    default_shift = tilt.norm_sq + options.shift_offset
    shift = default_shift if shift_guess is None else shift_guess

    eigenvalue, x, y, residual, iterations, final_shift = shift_invert_iteration(
        matrix, system.mass, shift, options, start, left_start
    )
    result = EigenResult(tilt, float(eigenvalue), _normalise(x, system.mass), float(residual),
                         iterations, final_shift, _normalise(y, system.mass))

    if not result.is_single_signed(options.positivity_tolerance) and shift != default_shift:
        get_logger().debug(f"Non-principal eigenpair at p=({tilt.p:.4g}, {tilt.q:.4g}); retrying default shift")
        eigenvalue, x, y, residual, more, final_shift = shift_invert_iteration(
            matrix, system.mass, default_shift, options
        )
        result = EigenResult(tilt, float(eigenvalue), _normalise(x, system.mass), float(residual),
                             iterations + more, final_shift, _normalise(y, system.mass))
    return result


def principal_eigenvalue_tilted(system: TiltedSystem, options: Optional[SolverOptions] = None) -> EigenResult:
    """Principal eigenvalue of the tilted-periodicity (ψ) discretisation."""
    options = options or SolverOptions()
    shift = system.tilt.norm_sq + options.shift_offset
    eigenvalue, x, y, residual, iterations, final_shift = shift_invert_iteration(
        system.pencil(), system.mass, shift, options
    )
    if np.sum(x) < 0.0:
        x = -x
    return EigenResult(system.tilt, float(eigenvalue), x, float(residual), iterations, final_shift, y)
