import argparse
import glob
import logging
import os

from gbolab.config.env_loader import get_default_jobs, get_output_root
from gbolab.config.run_config import COMMANDS, load_run_config, parse_run_config
from gbolab.services.cutoffs_service import CutoffsService
from gbolab.services.norms_service import NormsService
from gbolab.services.picard_service import PicardService
from gbolab.services.resonance_service import ResonanceService
from gbolab.services.simulate_service import SimulateService
from gbolab.services.xfail_service import XfailService
from gbolab.utils.errors import GBOLabError

logger = logging.getLogger(__name__)

EXAMPLES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
                            'data', 'examples')
SERVICES = {
    'simulate': SimulateService,
    'norms': NormsService,
    'resonance': ResonanceService,
    'xfail': XfailService,
    'picard': PicardService,
    'cutoffs': CutoffsService,
}
EXIT_OK, EXIT_CHECKS_FAILED, EXIT_ERROR = 0, 1, 2
# only these sweeps fan out over worker processes
PARALLEL_COMMANDS = ('xfail',)


def list_examples(examples_dir=EXAMPLES_DIR):
    return sorted(glob.glob(os.path.join(examples_dir, '*.json')))


def build_parser():
    parser = argparse.ArgumentParser(prog='gbolab', description="Generalized Benjamin-Ono numerical lab")
    parser.add_argument('--list-examples', action='store_true', help="print the bundled example configs")
    subparsers = parser.add_subparsers(dest='command')
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"run the {command} experiment")
        sub.add_argument('--config', help="JSON run config (defaults when omitted)")
        sub.add_argument('--out', help="output directory (default: $GBO_LAB_OUT/<command>)")
        if command in PARALLEL_COMMANDS:
            sub.add_argument('--jobs', type=int, default=None, help="worker processes for the N sweep")
        sub.add_argument('--seed', type=int, default=None, help="override the config seed")
    return parser


class CLIHandler:
    """Parses a command line, runs one service, maps the outcome to an exit code"""

    def __init__(self, parser=None):
        self.parser = parser or build_parser()

    def load_config(self, args):
        if args.config:
            return load_run_config(args.config, command=args.command, seed=args.seed)
        return parse_run_config({}, command=args.command, seed=args.seed)

    def jobs(self, args):
        jobs = args.jobs if args.jobs is not None else get_default_jobs()
        if jobs < 1:
            raise GBOLabError(f"--jobs must be positive, got {jobs}")
        return jobs

    def handle(self, argv=None):
        args = self.parser.parse_args(argv)
        if args.list_examples:
            for path in list_examples():
                print(path)
            return EXIT_OK
        if args.command is None:
            self.parser.print_help()
            return EXIT_ERROR
        try:
            config = self.load_config(args)
            out_dir = args.out or os.path.join(get_output_root(), args.command)
            service = SERVICES[args.command](config)
            if args.command in PARALLEL_COMMANDS:
                manifest = service.run(out_dir, jobs=self.jobs(args))
            else:
                manifest = service.run(out_dir)
        except GBOLabError as e:
            logger.error("❌ %s: %s", type(e).__name__, e)
            return EXIT_ERROR
        return EXIT_OK if manifest.passed else EXIT_CHECKS_FAILED


def main(argv=None):
    return CLIHandler().handle(argv)
