import sys

from kmetro.cli import main

sys.exit(main())
