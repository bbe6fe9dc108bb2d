import sys

from softcomplex.cli import main

sys.exit(main())
