import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Calibrated constants and output locations
CONSTANTS_FILE = os.getenv('NODALRECT_CONSTANTS', 'constants.v1')  # Default: constants.v1 at repo root
OUTPUT_DIR = os.getenv('NODALRECT_OUTPUT_DIR', 'runs')  # Default: runs/
WORKERS = int(os.getenv('NODALRECT_WORKERS', '1'))  # Sweep worker pool size

# Numerical defaults (overridable per run config)
SOLVER_TOL = float(os.getenv('NODALRECT_SOLVER_TOL', '1e-9'))
SOLVER_MAXITER = int(os.getenv('NODALRECT_SOLVER_MAXITER', '500'))
KMAX = int(os.getenv('NODALRECT_KMAX', '12'))
CELLS_PER_UNIT_X = int(os.getenv('NODALRECT_CELLS_PER_UNIT_X', '20'))  # nx = ceil(20 * N)
CELLS_Y = int(os.getenv('NODALRECT_CELLS_Y', '40'))

# Logging Configuration (optional)
LOG_FILE = os.getenv('LOG_FILE', 'logs/nodalrect.log')  # Default: logs/nodalrect.log
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')  # DEBUG, INFO, WARNING, ERROR
LOG_MAX_BYTES = int(os.getenv('LOG_MAX_BYTES', str(10 * 1024 * 1024)))  # Default: 10 MB
LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', '5'))  # Default: 5 backup files
LOG_ROTATION_MODE = os.getenv('LOG_ROTATION_MODE', 'size')  # 'size' or 'time'
LOG_ROTATION_WHEN = os.getenv('LOG_ROTATION_WHEN', 'midnight')  # For time rotation: 'D', 'W0', 'H', 'midnight'
LOG_ROTATION_INTERVAL = int(os.getenv('LOG_ROTATION_INTERVAL', '1'))  # For time rotation

# Validate settings
invalid_vars = {
    'NODALRECT_WORKERS': WORKERS < 1,
    'NODALRECT_SOLVER_TOL': not (0.0 < SOLVER_TOL <= 1e-6),
    'NODALRECT_KMAX': KMAX < 2,
    'NODALRECT_CELLS_Y': CELLS_Y < 16,
    'LOG_ROTATION_MODE': LOG_ROTATION_MODE.lower() not in ('size', 'time'),
}

bad_vars = [var for var, bad in invalid_vars.items() if bad]
if bad_vars:
    raise ValueError(f"Invalid environment settings: {', '.join(bad_vars)}")
