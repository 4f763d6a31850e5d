import sys

from pinching.cli import run_cli

sys.exit(run_cli())
