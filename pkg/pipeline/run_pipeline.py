#!/usr/bin/env python3
"""
Obstacle-Lattice Rate-Function Pipeline Runner
Main script: one subcommand per pipeline step, configured by JSON files plus --set overrides.
"""

import sys
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add pipeline to Python path
sys.path.insert(0, str(Path(__file__).parent))

from src.steps import ERROR_CONFIGURATION, STEP_CLASSES
from src.utils import (
    ConfigurationError, get_logger, initialize_logger, load_pipeline_config, parse_override, reset_logger
)

EXIT_SUCCESS = 0
EXIT_NUMERICAL = 1
EXIT_CONFIGURATION = 2
EXIT_INTERRUPTED = 130

DEFAULT_CONFIG = str(Path(__file__).parent / 'config' / 'pipeline_config.json')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Large-deviation rate functions for diffusion through obstacle lattices')
    parser.add_argument('--config', default=DEFAULT_CONFIG,
                        help='Path to pipeline configuration file')
    parser.add_argument('--verbose', '-v', action='store_true',
                        help='Enable verbose logging')
    parser.add_argument('--output-dir',
                        help='Output root (default: OBSTACLE_LD_OUTPUT_ROOT or data.base_path)')
    parser.add_argument('--workers', type=int,
                        help='Parallel workers for sweeps and tabulations')
    parser.add_argument('--mesh-in', help='Read the mesh from this file instead of building it')
    parser.add_argument('--mesh-out', help='Write the built mesh to this file')
    parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                        help='Override a merged config key, e.g. --set geometry.obstacle_radius=0.01 (repeatable)')

    subcommands = parser.add_subparsers(dest='command', required=True)
    subcommands.add_parser('mesh-report', help='Build or read a mesh and write its audit')
    subcommands.add_parser('f-sweep', help='Principal eigenvalue f(p) over the tilt grid')
    rate = subcommands.add_parser('rate-function', help='Legendre transform of an f-table with audits')
    rate.add_argument('--input', help='f-table CSV (swept here when omitted)')
    subcommands.add_parser('canonical-tabulate', help='Tabulate D_i(f0) of the canonical astroid problem')
    dense = subcommands.add_parser('dense-solve', help='Dense-asymptotic f and g from the transcendental relation')
    dense.add_argument('--input', help='D table CSV (tabulated here when omitted)')
    front = subcommands.add_parser('front-speed', help='FKPP front speeds for the configured model')
    front.add_argument('--input', help='f-table CSV for dispersion.model=table')
    compare = subcommands.add_parser('compare', help='Compare rate functions along rays')
    compare.add_argument('--input', help='FEM rate-table CSV')
    compare.add_argument('--asymptotic-input', help='Dense-asymptotic rate-table CSV')
    reproduce = subcommands.add_parser('reproduce', help='Regenerate the data behind a named plot')
    reproduce.add_argument('target', help='Target name or alias from config/reproduce_config.json')
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for assignment in args.overrides:
        overrides.update(parse_override(assignment))
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigurationError(f"--workers must be at least 1, got {args.workers}")
        overrides['performance.max_workers'] = args.workers
        overrides['performance.parallel_processing'] = args.workers > 1
    if args.verbose:
        overrides['performance.show_progress'] = True
    return overrides


def step_options(args: argparse.Namespace) -> Dict[str, Any]:
    options = {'mesh_in': args.mesh_in, 'mesh_out': args.mesh_out}
    for name in ('input', 'asymptotic_input', 'target'):
        if getattr(args, name, None) is not None:
            options[name] = getattr(args, name)
    return {key: value for key, value in options.items() if value is not None}


def main(argv: Optional[List[str]] = None) -> int:
    """Main pipeline execution function."""
    args = build_parser().parse_args(argv)
    step_name = args.command.replace('-', '_')
    logger = get_logger()

    try:
        # Load configuration first to get run_id
        config_loader = load_pipeline_config(args.config, collect_overrides(args), args.output_dir)
        run_id = config_loader.get_run_id()
        data_paths = config_loader.get_data_paths()

        # Reset any existing logger and initialize with run-scoped directory
        reset_logger()
        logger = initialize_logger(args.config, data_paths['logs'])
        if args.verbose:
            logger.set_level('DEBUG')

        logger.info("🚀 Starting obstacle-lattice rate-function pipeline")
        logger.info(f"Configuration: {args.config}")
        logger.info(f"Step: {step_name}")
        logger.info(f"Run ID: {run_id}")
        logger.info(f"Data paths: base={data_paths['base']}, tables={data_paths['tables']}, meshes={data_paths['meshes']}")

        step = STEP_CLASSES[step_name](config_loader, step_options(args))
        result = step.execute()

        if not result['success']:
            logger.error(f"❌ {step_name} failed: {result.get('error')}")
            return EXIT_CONFIGURATION if result.get('error_kind') == ERROR_CONFIGURATION else EXIT_NUMERICAL

        output = result.get('output_file') or result.get('output_files')
        if output:
            logger.info(f"📄 Output: {output}")
        logger.info("✅ Pipeline execution completed successfully")
        return EXIT_SUCCESS

    except KeyboardInterrupt:
        logger.info("Pipeline execution interrupted by user")
        return EXIT_INTERRUPTED
    except ConfigurationError as e:
        logger.error(f"❌ Configuration error: {e}")
        return EXIT_CONFIGURATION
    except Exception as e:
        logger.critical(f"Pipeline execution failed: {e}", exception=e)
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
