import sys

from mgon.cli.main import main

sys.exit(main())
