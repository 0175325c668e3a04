import sys

from demobpr.cli import main

sys.exit(main())
