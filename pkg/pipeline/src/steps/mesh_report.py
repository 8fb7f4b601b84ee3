"""
Mesh report step: build (or read) a cell or astroid mesh and write its audit.
"""

from typing import Any, Dict

from src.geometry.mesher import build_astroid_mesh, validate_mesh
from src.steps.base import PipelineStep
from src.steps.workflows import cell_mesh
from src.utils.errors import ConfigurationError
from src.utils.tables import build_provenance, write_json

MESH_KINDS = ('cell', 'astroid')


class MeshReportStep(PipelineStep):
    step_name = 'mesh_report'
    required_fields = ['mesh.kind']

    def run(self) -> Dict[str, Any]:
        kind = self.setting('mesh.kind')
        if kind not in MESH_KINDS:
            raise ConfigurationError(f"mesh.kind must be one of {MESH_KINDS}, got '{kind}'")

        if kind == 'cell':
            mesh = self.load_or_build_mesh(lambda: cell_mesh(self.run_config), 'cell.mesh')
        else:
            mesh = self.load_or_build_mesh(lambda: build_astroid_mesh(self.run_config.astroid_spec()), 'astroid.mesh')

        audit = validate_mesh(mesh)
        report = build_provenance('mesh_report', {'kind': kind, 'mesh_size': mesh.mesh_size}, self.provenance_config())
        report['audit'] = audit.to_dict()
        report_path = write_json(report, self.table_path(f'{kind}_mesh_report.json'))

        self.logger.info(f"📐 {kind} mesh: {audit.n_vertices} vertices, {audit.n_triangles} triangles, "
                         f"min angle {audit.min_angle_deg:.1f}°, area {audit.area:.6f}")
        result = {
            'success': audit.ok,
            'kind': kind,
            'n_vertices': audit.n_vertices,
            'n_triangles': audit.n_triangles,
            'n_periodic_pairs': audit.n_periodic_pairs,
            'min_angle_deg': audit.min_angle_deg,
            'area': audit.area,
            'problems': list(audit.problems),
            'output_file': report_path,
        }
        if not audit.ok:
            result['error'] = f"mesh audit failed: {'; '.join(audit.problems)}"
        return result
