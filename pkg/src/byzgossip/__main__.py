import sys

from byzgossip.harness.cli import main

sys.exit(main())
