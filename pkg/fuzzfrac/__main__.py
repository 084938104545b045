"""Allow ``python -m fuzzfrac``."""
import sys

from .cli import main

sys.exit(main())
