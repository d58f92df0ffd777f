import sys

from annotalign.cli import main

sys.exit(main())
