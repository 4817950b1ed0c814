"""
MULTIPOLY Command Dispatcher
Routes run configurations to registered command handlers
"""

from typing import Dict, Any, Callable, Optional, List, Tuple
from dataclasses import dataclass, field
from enum import Enum, auto
from pathlib import Path
import logging

from .errors import MalformedInput
from .mpcore import Field

logger = logging.getLogger(__name__)

try:
    from rapidfuzz import fuzz, process
    FUZZY_AVAILABLE = True
except ImportError:
    FUZZY_AVAILABLE = False
    logger.warning("rapidfuzz not available, command names must match exactly")


class CommandCategory(Enum):
    """Library area a command fronts"""
    NORMS = auto()
    POLARIZATION = auto()
    COMPOSITION = auto()
    BH_LAB = auto()


@dataclass
class Flag:
    """One argparse argument: option strings plus add_argument keywords"""
    names: Tuple[str, ...]
    options: Dict[str, Any] = field(default_factory=dict)


def flag(*names: str, **options) -> Flag:
    return Flag(names, options)


@dataclass
class CommandHandler:
    """Represents a registered command"""
    name: str
    category: CommandCategory
    handler: Callable
    description: str = ""
    flags: List[Flag] = field(default_factory=list)


@dataclass
class RunConfig:
    """
    One CLI invocation

    `options` holds the command's own flags; the shared ones are fields.
    """
    command: str
    options: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    starts: Optional[int] = None
    tol: Optional[float] = None
    output: Optional[Path] = None
    scalar_field: Field = Field.REAL

    def __post_init__(self):
        if self.seed is not None and self.seed <= 0:
            raise MalformedInput(f"field 'seed' must be positive, got {self.seed}")
        if self.starts is not None and self.starts <= 0:
            raise MalformedInput(f"field 'starts' must be positive, got {self.starts}")
        if self.tol is not None and self.tol < 0:
            raise MalformedInput(f"field 'tol' must be non-negative, got {self.tol}")
        self.scalar_field = Field.parse(self.scalar_field)

    def option(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value


@dataclass
class CommandOutcome:
    """
    What a command produced

    text goes to --out or stdout; files are extra artifacts keyed by path.
    passed is False when a checked inequality was violated.
    """
    text: str
    passed: bool = True
    files: Dict[Path, str] = field(default_factory=dict)


class Dispatcher:
    """
    Command dispatcher that routes run configurations to handlers

    Features:
    - Decorator registration
    - Fuzzy resolution of misspelt command names
    - Exceptions returned as result dictionaries
    """

    def __init__(self):
        self._handlers: Dict[str, CommandHandler] = {}

    def register(
        self,
        name: str,
        category: CommandCategory,
        handler: Callable,
        description: str = "",
        flags: Optional[List[Flag]] = None,
    ):
        """
        Register a command handler

        Args:
            name: Command name as typed on the command line
            category: Library area the command fronts
            handler: Callable taking a RunConfig and returning a CommandOutcome
            description: Help text
            flags: Command-specific arguments
        """
        self._handlers[name] = CommandHandler(name, category, handler, description, list(flags or []))
        logger.debug(f"Registered command: {name} [{category.name}]")

    def register_decorator(
        self,
        name: str,
        category: CommandCategory,
        description: str = "",
        flags: Optional[List[Flag]] = None,
    ):
        """Decorator for registering command handlers"""
        def decorator(func: Callable):
            self.register(name, category, func, description, flags)
            return func
        return decorator

    def resolve_name(self, name: str) -> Optional[str]:
        """Exact name, else the closest registered name above COMMAND_MATCH_THRESHOLD"""
        from config import COMMAND_MATCH_THRESHOLD

        if name in self._handlers:
            return name
        if FUZZY_AVAILABLE and self._handlers:
            match = process.extractOne(
                name, list(self._handlers), scorer=fuzz.ratio, score_cutoff=COMMAND_MATCH_THRESHOLD
            )
            if match:
                logger.info(f"Interpreting '{name}' as '{match[0]}'")
                return match[0]
        return None

    def dispatch(self, config: RunConfig) -> Dict[str, Any]:
        """
        Dispatch a run configuration to its handler

        Args:
            config: Parsed invocation

        Returns:
            Result dictionary from handler
        """
        name = self.resolve_name(config.command)
        if name is None:
            logger.warning(f"No handler for: {config.command}")
            return {
                "success": False,
                "error": f"unknown command '{config.command}'",
                "error_type": "MalformedInput",
            }

        logger.debug(f"Dispatching: {name}")
        try:
            result = self._handlers[name].handler(config)
            return {
                "success": True,
                "handler": name,
                "result": result
            }
        except Exception as e:
            logger.error(f"Handler {name} error: {e}")
            logger.debug("Handler traceback", exc_info=True)
            return {
                "success": False,
                "handler": name,
                "error": str(e),
                "error_type": type(e).__name__,
            }

    def get_registered_commands(self) -> List[CommandHandler]:
        return list(self._handlers.values())

    def unregister(self, name: str):
        """Unregister a command handler"""
        if name in self._handlers:
            del self._handlers[name]
            logger.debug(f"Unregistered command: {name}")


# Global dispatcher instance
_dispatcher_instance: Optional[Dispatcher] = None


def get_dispatcher() -> Dispatcher:
    """Get or create global dispatcher instance"""
    global _dispatcher_instance
    if _dispatcher_instance is None:
        _dispatcher_instance = Dispatcher()
    return _dispatcher_instance


def command(name: str, category: CommandCategory, description: str = "", flags: Optional[List[Flag]] = None):
    """
    Decorator for registering command handlers

    Usage:
        @command("norm", CommandCategory.NORMS, "Bracket the sup norm", [flag("--in", dest="input")])
        def run_norm(config):
            ...
    """
    return get_dispatcher().register_decorator(name, category, description, flags)
