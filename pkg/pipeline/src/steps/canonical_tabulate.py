"""
Canonical tabulation step: D₁, D₂, D₃ of the astroid cusp problem over the f₀ grid,
plus optional nodal ψ* fields.
"""

from typing import Any, Dict, List

from src.dense.canonical import CanonicalProblem, canonical_field
from src.geometry.mesher import build_astroid_mesh
from src.steps.base import PipelineStep
from src.steps.workflows import canonical_dtable
from src.utils.tables import build_provenance, write_table

SYMMETRY_TOLERANCE = 1e-6


class CanonicalTabulateStep(PipelineStep):
    step_name = 'canonical_tabulate'
    required_fields = ['dense']

    def run(self) -> Dict[str, Any]:
        spec = self.run_config.astroid_spec()
        mesh = self.load_or_build_mesh(lambda: build_astroid_mesh(spec), 'astroid.mesh')
        problem = CanonicalProblem(spec, mesh)

        dtable = canonical_dtable(self.run_config, problem)
        output_file = dtable.to_csv(self.table_path(self.setting('output.filename', 'dtable.csv')),
                                    self.provenance_config())

        field_files: List[str] = []
        for f0 in self.setting('canonical.field_f0', []) or []:
            frame = canonical_field(float(f0), spec, problem)
            path = self.table_path(f'canonical_field_f0_{float(f0):g}.csv')
            field_files.append(write_table(frame, path, build_provenance(
                'canonical_field', {'f0': float(f0), 'trim_distance': spec.trim_distance}, self.provenance_config())))

        failed = dtable.metadata.get('failed_nodes', [])
        mismatch = dtable.metadata.get('max_d4_d2_mismatch', 0.0)
        if mismatch > SYMMETRY_TOLERANCE:
            self.logger.warning(f"⚠️ D4/D2 mirror mismatch {mismatch:.2e} exceeds {SYMMETRY_TOLERANCE:g}")
        result = {
            'nodes': len(dtable),
            'failed_nodes': len(failed),
            'max_d4_d2_mismatch': mismatch,
            'monotonicity_violations': dtable.metadata.get('monotonicity_violations', {}),
            'nonpositive_nodes': dtable.metadata.get('nonpositive_nodes', {}),
            'd1_zero_crossing': dtable.metadata.get('d1_zero_crossing'),
            'output_file': output_file,
            'field_files': field_files,
            'success': not failed and len(dtable) > 0,
        }
        if not result['success']:
            result['error'] = f"{len(failed)} canonical solves failed"
        return result
