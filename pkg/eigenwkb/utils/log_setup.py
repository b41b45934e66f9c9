import logging

from rich.console import Console
from rich.logging import RichHandler

from eigenwkb.config import settings

_configured = False


def setup_logging(level: str = None) -> None:
    """Route every ``eigenwkb`` logger through a rich handler on stderr."""
    global _configured
    root = logging.getLogger("eigenwkb")
    root.setLevel((level or settings.LOG_LEVEL).upper())
    if _configured:
        return
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.propagate = False
    _configured = True
