"""Allow ``python -m hyperrelax``."""

import sys

from hyperrelax.cli import main

sys.exit(main())
