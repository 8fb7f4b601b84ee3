"""
Eigenvalue sweep step: mesh the cell, compute f(p) over the tilt grid and audit the table.
"""

from typing import Any, Dict

from src.steps.base import PipelineStep
from src.steps.workflows import audit_ftable, cell_mesh, fem_ftable


class FSweepStep(PipelineStep):
    """Writes ftable.csv; any failed tilt node makes the step fail after the table is saved."""

    step_name = 'f_sweep'
    required_fields = ['geometry', 'transforms', 'solver']

    def run(self) -> Dict[str, Any]:
        self.run_config.cell_spec()
        mesh = self.load_or_build_mesh(lambda: cell_mesh(self.run_config), 'cell.mesh')
        ftable = fem_ftable(self.run_config, mesh)
        audit = audit_ftable(ftable, self.run_config)
        ftable.metadata['audit'] = audit
        output_file = ftable.to_csv(self.table_path(self.setting('output.filename', 'ftable.csv')),
                                    self.provenance_config())
        self.logger.audit('f-table audit', audit, warn=bool(audit['failed_nodes'] or audit['bound_violations']))
        self.logger.info(f"💾 f-table written to {output_file}")

        result = dict(audit, output_file=output_file, success=audit['failed_nodes'] == 0)
        if audit['failed_nodes']:
            result['error'] = f"{audit['failed_nodes']} tilt nodes failed to converge"
        return result
