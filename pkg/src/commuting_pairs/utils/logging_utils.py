"""
Logging setup for commuting-pairs.

Library modules obtain loggers through :func:`get_logger`; the CLI installs a
rich handler once through :func:`configure_logging`.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

_ROOT = "commuting_pairs"


def get_logger(name: str) -> logging.Logger:
    """Return a logger below the package's root logger."""
    if name == _ROOT or name.startswith(f"{_ROOT}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{_ROOT}.{name}")


def configure_logging(verbose: bool = False, console: Optional[Console] = None) -> None:
    """
    Route package log records to a rich handler on stderr.

    Args:
        verbose: Emit DEBUG records when set, WARNING and above otherwise
        console: Console to write to (defaults to a stderr console)
    """
    root = logging.getLogger(_ROOT)
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)

    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    root.propagate = False
