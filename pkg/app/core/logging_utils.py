import logging
from collections import deque
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOG_FORMAT = "[%(levelname)s] %(asctime)s %(name)s :: %(message)s"
MAIN_LOG = "matchloom.log"
DEBUG_LOG = "matchloom-debug.log"
# graph builds log a line per chunk at DEBUG; keep library chatter out of the debug file
_QUIET = ("aiosqlite", "sqlalchemy.engine", "httpx", "multiprocessing")

_state: dict[str, object] = {"configured": False, "debug": False, "root": None}


def log_dir(config_root: Path) -> Path:
    return Path(config_root) / "logs"


def _rotating(path: Path, level: int) -> logging.Handler | None:
    try:
        handler = RotatingFileHandler(path, maxBytes=10 * 1024 * 1024, backupCount=5, encoding="utf-8")
    except OSError as exc:  # pragma: no cover - startup-only path
        print(f"[MatchLoom] Could not open {path.name}: {exc}")
        return None
    handler.setLevel(level)
    return handler


def setup_logging(config_root: Path, debug_enabled: bool = False, console: bool = True) -> None:
    """Configure stdout plus rotating files under <config_root>/logs. Repeated calls are no-ops
    unless the debug toggle or the root changes."""
    root = Path(config_root)
    if _state["configured"] and _state["debug"] == debug_enabled and _state["root"] == root:
        return
    level = logging.DEBUG if debug_enabled else logging.INFO
    directory = log_dir(root)
    handlers: list[logging.Handler] = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:  # pragma: no cover - startup-only path
        print(f"[MatchLoom] Could not create log dir: {exc}")

    if console:
        stream = logging.StreamHandler()
        stream.setLevel(level)
        handlers.append(stream)
    handlers += [h for h in (_rotating(directory / MAIN_LOG, logging.INFO),) if h]
    if debug_enabled:
        handlers += [h for h in (_rotating(directory / DEBUG_LOG, logging.DEBUG),) if h]

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
    for name in _QUIET:
        logging.getLogger(name).setLevel(logging.WARNING)
    _state.update(configured=True, debug=debug_enabled, root=root)


def reconfigure_logging(config_root: Path, debug_enabled: bool) -> None:
    """Rebuild the handler stack, e.g. after the debug toggle changed."""
    _state["configured"] = False
    setup_logging(config_root, debug_enabled)


def tail_log(config_root: Path, debug: bool = False, lines: int = 200) -> list[str]:
    path = log_dir(config_root) / (DEBUG_LOG if debug else MAIN_LOG)
    if not path.exists():
        return []
    with path.open(encoding="utf-8", errors="replace") as fh:
        return [line.rstrip("\n") for line in deque(fh, maxlen=max(1, lines))]
