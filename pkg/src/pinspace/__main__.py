import sys

from pinspace.cli import main

sys.exit(main())
