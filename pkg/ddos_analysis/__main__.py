import sys

from ddos_analysis.cli.main import main

sys.exit(main())
