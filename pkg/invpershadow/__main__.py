"""Run the command-line harness: python -m invpershadow <command> [--config FILE] [--out DIR]"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
