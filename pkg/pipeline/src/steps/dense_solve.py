"""
Dense solve step: dense-asymptotic f(p) from the transcendental relation and its rate function.
"""

from typing import Any, Dict

from src.dense.canonical import DTable
from src.dense.transcendental import SmallFLaw
from src.steps.base import PipelineStep
from src.steps.workflows import canonical_dtable, dense_ftable, network_comparison, rate_from_ftable
from src.utils.errors import ConfigurationError

D_SOURCES = ('canonical', 'small_f')


class DenseSolveStep(PipelineStep):
    """
    The D_i come from --input (a D table CSV), a fresh canonical tabulation, or the
    small-f₀ law, which turns the relation into the network model.
    """

    step_name = 'dense_solve'
    required_fields = ['dense', 'transforms']

    def _d_provider(self):
        source = self.input_path()
        if source:
            self.logger.info(f"📂 Reading D table from {source}")
            return DTable.read_csv(source)
        d_source = self.setting('dense.d_source', 'canonical')
        if d_source not in D_SOURCES:
            raise ConfigurationError(f"dense.d_source must be one of {D_SOURCES}, got '{d_source}'")
        if d_source == 'small_f':
            return SmallFLaw()
        dtable = canonical_dtable(self.run_config)
        dtable.to_csv(self.table_path('dtable.csv'), self.provenance_config())
        return dtable

    def run(self) -> Dict[str, Any]:
        params = self.run_config.network_params()
        self.logger.info(f"🧩 Dense asymptotics at ε={params.epsilon:g} (α={params.alpha:.6g}, β={params.beta:.6g})")
        ftable = dense_ftable(self.run_config, self._d_provider())
        ftable_file = ftable.to_csv(self.table_path('dense_ftable.csv'), self.provenance_config())

        rate = rate_from_ftable(self.run_config, ftable)
        deviation = network_comparison(self.run_config, rate)
        rate.metadata['max_relative_to_network'] = deviation
        rate_file = rate.to_csv(self.table_path('dense_rate.csv'), self.provenance_config())

        failed = int(ftable.metadata.get('n_failed', 0))
        result = {
            'nodes': len(ftable),
            'failed_nodes': failed,
            'xi_nodes': len(rate),
            'boundary_nodes': rate.n_boundary,
            'max_relative_to_network': deviation,
            'ftable_file': ftable_file,
            'output_file': rate_file,
            'success': failed == 0,
        }
        if failed:
            result['error'] = f"{failed} dense-asymptotic nodes failed (outside the D table range?)"
        return result
