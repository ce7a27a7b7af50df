import sys

from morselab.cli import main

sys.exit(main())
