'''Run an experiment from a checkout without installing: python lkg.py <command> [flags]'''

import sys
from libkingsgrid.cli import main

if __name__ == '__main__':
    sys.exit(main())
