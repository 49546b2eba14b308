import sys

from alphacross.cli import main

sys.exit(main())
