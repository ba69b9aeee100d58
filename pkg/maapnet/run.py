import os
import signal
import sys

# Make the package importable when run as a script
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from maapnet.cli import main


def signal_handler(sig, frame):
    print('\nInterrupted, exiting', file=sys.stderr)
    # Worker processes of `verify` are torn down with the interpreter
    os._exit(130)


if __name__ == "__main__":
    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)
    sys.exit(main())
