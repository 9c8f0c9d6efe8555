###### RUN THIS FILE TO USE THE COMMAND LINE (documented as `biortho`) ######

import sys

# src/core/app.py holds the command providers and the entry point
from src.core.app import main


if __name__ == "__main__":
    sys.exit(main())
