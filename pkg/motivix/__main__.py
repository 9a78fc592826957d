import sys

from motivix.cli import main

sys.exit(main())
