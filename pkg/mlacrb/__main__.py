import sys

from mlacrb.cli import main

sys.exit(main())
