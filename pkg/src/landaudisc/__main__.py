import sys

from landaudisc.cli import main

sys.exit(main())
