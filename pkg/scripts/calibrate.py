#!/usr/bin/env python3
"""
Calibration Script

Runs the calibration sweep (flat and curved specs, small and large
perturbation, several N) at the reference resolution and writes the frozen
constants file read by every certificate.
"""

import argparse
import json
import sys
from pathlib import Path

# Add parent directory to path to import modules
sys.path.insert(0, str(Path(__file__).parent.parent))

from certify.calibration import CALIBRATION_N, SAFETY, calibrate, calibration_specs, measure
from core import config
from core.constants import load_constants, save_constants
from core.logging import setup_from_config
from discretize.mesh import Resolution

logger = setup_from_config()


def main():
    """Main function."""
    parser = argparse.ArgumentParser(
        description="Calibrate the nodal-line constants",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Full sweep at the reference resolution, overwrite constants.v1
  python scripts/calibrate.py

  # Quick look at a coarser grid without touching the frozen file
  python scripts/calibrate.py --cells-per-unit 12 --ny 24 --out /tmp/constants.json
        """
    )
    parser.add_argument('--out', default=config.CONSTANTS_FILE, help='constants file to write')
    parser.add_argument('--cells-per-unit', type=float, default=config.CELLS_PER_UNIT_X,
                        help='cells per unit length in x')
    parser.add_argument('--ny', type=int, default=config.CELLS_Y, help='cells across the height')
    parser.add_argument('--safety', type=float, default=SAFETY, help='margin on every measured ratio')
    parser.add_argument('--n', type=float, nargs='+', default=list(CALIBRATION_N), help='values of N')
    parser.add_argument('--measurements', default=None, help='also write the raw ratios as JSON here')
    args = parser.parse_args()

    if args.safety < 1:
        parser.error("--safety must be at least 1")

    resolution = Resolution(args.cells_per_unit, args.ny)
    base = load_constants()
    specs = calibration_specs(args.n)
    logger.info(f"Calibrating on {len(specs)} specs, {args.cells_per_unit:g} cells/unit x {args.ny}")

    measurements = [measure(spec, resolution, base) for spec in specs]
    failed = [m for m in measurements if m.errors]
    if failed:
        logger.warning(f"{len(failed)} calibration point(s) reported errors")

    constants = calibrate(measurements, base, args.safety)
    save_constants(constants, args.out)
    if args.measurements:
        Path(args.measurements).write_text(
            json.dumps([m.to_dict() for m in measurements], indent=2, sort_keys=True) + '\n', encoding='utf-8')

    print(f"Wrote {args.out}")
    for name, value in sorted(constants.to_dict().items()):
        print(f"  {name:18s} {value}")


if __name__ == "__main__":
    main()
