# main.py
import logging
import sys

from rich.console import Console
from rich.logging import RichHandler

from src.config import load_defaults
from src.interface.cli import run_cli


def setup_logging(log_file=None):
    """Rich logging on stderr, plus an optional plain log file."""
    handlers = [
        RichHandler(console=Console(stderr=True), rich_tracebacks=True, markup=False, show_path=False)
    ]
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        handlers.append(file_handler)
    logging.basicConfig(level=logging.INFO, format="%(message)s", handlers=handlers)


def main():
    """Main entry point for the application."""
    setup_logging(load_defaults().log_file)
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
