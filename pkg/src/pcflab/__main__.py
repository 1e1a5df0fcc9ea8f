import sys

from pcflab.cli import main

sys.exit(main())
