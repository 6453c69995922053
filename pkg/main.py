"""
Single entry point: python main.py <command> --config experiment.txt [...]
Creates the run registry on startup.
"""
import logging
import sys

from config import LOG_LEVEL
from database import init_db

if __name__ == "__main__":
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    init_db()

    from cli.main import main

    sys.exit(main())
