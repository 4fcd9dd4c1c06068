import logging
import sys

from gbolab.config.env_loader import get_log_level, load_env_file
from gbolab.handlers.cli_handler import main

# Load environment variables
load_env_file()


def run():
    logging.basicConfig(level=get_log_level(), format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    sys.exit(main())


if __name__ == '__main__':
    run()
