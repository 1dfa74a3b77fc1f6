import sys

from wpsrest.cli import main

sys.exit(main())
