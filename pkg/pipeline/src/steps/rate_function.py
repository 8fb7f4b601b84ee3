"""
Rate function step: Legendre transform of an f-table (read with --input, or swept here)
plus the conjugacy, convexity and effective-diffusivity audits.
"""

from typing import Any, Dict

from src.eigen.ftable import FTable
from src.steps.base import PipelineStep
from src.steps.workflows import audit_ftable, audit_rate, cell_mesh, fem_ftable, rate_from_ftable
from src.utils.tables import build_provenance, write_json

YOUNG_FENCHEL_TOLERANCE = 1e-8


class RateFunctionStep(PipelineStep):
    step_name = 'rate_function'
    required_fields = ['transforms']

    def _ftable(self) -> FTable:
        source = self.input_path()
        if source:
            self.logger.info(f"📂 Reading f-table from {source}")
            return FTable.read_csv(source)
        mesh = self.load_or_build_mesh(lambda: cell_mesh(self.run_config), 'cell.mesh')
        ftable = fem_ftable(self.run_config, mesh)
        ftable.metadata['audit'] = audit_ftable(ftable, self.run_config)
        ftable.to_csv(self.table_path('ftable.csv'), self.provenance_config())
        return ftable

    def run(self) -> Dict[str, Any]:
        ftable = self._ftable()
        rate = rate_from_ftable(self.run_config, ftable)
        audit = audit_rate(self.run_config, ftable, rate)
        rate.metadata['audit'] = audit
        self.logger.audit('rate audit', audit)

        output_file = rate.to_csv(self.table_path(self.setting('output.filename', 'rate_table.csv')),
                                  self.provenance_config())
        summary_file = write_json(build_provenance('rate_summary', audit, self.provenance_config()),
                                  self.table_path('rate_summary.json'))
        if audit.get('kappa_contour') is not None:
            self.logger.info(f"📏 κ_eff: contour fit {audit['kappa_contour']:.6g}, "
                             f"f-curvature {audit.get('kappa_hessian')}")

        result = dict(audit, output_file=output_file, summary_file=summary_file)
        if audit['young_fenchel_violation'] > YOUNG_FENCHEL_TOLERANCE:
            result['success'] = False
            result['error'] = f"Young–Fenchel inequality violated by {audit['young_fenchel_violation']:.3g}"
        return result
