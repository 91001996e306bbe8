"""python -m async_election"""

import sys

from async_election.cli import main

if __name__ == "__main__":
    sys.exit(main())
