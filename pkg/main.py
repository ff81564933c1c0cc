#!/usr/bin/env python3
"""
nodalrect - nodal lines of second Dirichlet eigenfunctions on curvilinear rectangles

Every subcommand reads a run configuration (KEY=VALUE file), runs the tasks it
names together with their prerequisites and writes JSON reports, CSV tables and
plot-data files under the output directory.

Usage:
    python main.py certify --config configs/flat_eta.cfg
    python main.py sweep --config configs/sweep_flat_N.cfg --workers 4
"""

import argparse
import sys
from pathlib import Path

from cli.runconfig import load_config, with_tasks
from cli.runner import EXIT_CONFIG, report_error, run
from core import config
from core.constants import load_constants
from core.errors import NodalRectError
from core.logging import setup_from_config

logger = setup_from_config()

SUBCOMMANDS = {
    'validate': 'check the domain against its curve bounds',
    'solve': 'compute the smallest eigenpairs',
    'nodal': 'extract the nodal line of the second eigenfunction',
    'certify': 'evaluate every nodal-line bound and its verdict',
    'hadamard': 'compare boundary mode values with the first-order formula',
    'partition': 'cut repeatedly along nodal lines',
    'courant': 'count nodal domains of the k-th eigenfunction',
    'sweep': 'repeat the configured tasks over SWEEP_VALUES',
    'run': 'run the tasks listed in the config file',
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='nodalrect', description=__doc__.split('\n\n')[0].strip())
    commands = parser.add_subparsers(dest='command', required=True)
    for name, help_text in SUBCOMMANDS.items():
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument('--config', required=True, help='run configuration file')
        sub.add_argument('--out', default=None, help=f'output directory (default: {config.OUTPUT_DIR}/<config name>)')
        sub.add_argument('--constants', default=None,
                         help=f'calibrated constants file (default: {config.CONSTANTS_FILE})')
        sub.add_argument('--workers', type=int, default=config.WORKERS, help='sweep worker pool size')
    return parser


def main(argv=None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        logger.error(f"--workers must be at least 1, got {args.workers}")
        return EXIT_CONFIG

    try:
        run_config = load_config(args.config)
        if args.command == 'sweep':
            run_config = with_tasks(run_config, [*run_config.tasks, 'sweep'])
        elif args.command != 'run':
            run_config = with_tasks(run_config, [args.command])
        constants = load_constants(args.constants)
    except NodalRectError as e:
        logger.error(f"Could not load {args.config}: {e.message}")
        return report_error(e, args.out or Path(config.OUTPUT_DIR) / Path(args.config).stem)

    logger.info(f"Running {args.command} for {run_config.name}: tasks {', '.join(run_config.tasks)}")
    return run(run_config, out=args.out, constants=constants, workers=args.workers)


if __name__ == "__main__":
    sys.exit(main())
