import sys

from pickdyn.cli import main

sys.exit(main())
