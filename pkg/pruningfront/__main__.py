from __future__ import annotations

import sys

from pruningfront.cli import main

if __name__ == "__main__":
    sys.exit(main())
