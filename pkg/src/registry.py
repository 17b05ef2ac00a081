"""
Decorator-based command registry. Each command is registered with a
pydantic argument schema from which its argparse sub-parser is generated.
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, Optional, TextIO, Type, Union, get_args, get_origin

from pydantic import BaseModel

logger = logging.getLogger(__name__)


class CommandContext:
    """Execution context handed to every command."""

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr


class CommandRegistry:
    """Registry of subcommands and their argument schemas."""

    def __init__(self, title: str, version: str = "1.0.0"):
        self.title = title
        self.version = version
        self.commands: Dict[str, Dict[str, Any]] = {}

    def command(self, name: str, schema: Type[BaseModel], help: str = ""):
        """Decorator to register a command."""
        def decorator(func: Callable):
            self.commands[name] = {
                "function": func,
                "schema": schema,
                "name": name,
                "help": help or (func.__doc__ or "").strip().split("\n")[0],
            }
            logger.debug(f"Registered command: {name}")
            return func
        return decorator

    def build_parser(self) -> argparse.ArgumentParser:
        """One sub-parser per command, one --flag per schema field."""
        parser = argparse.ArgumentParser(prog=self.title)
        parser.add_argument("--version", action="version", version=f"%(prog)s {self.version}")
        parser.add_argument("--log-level", default=None, help="Logging level (overrides SPANNER_LOG_LEVEL)")
        sub = parser.add_subparsers(dest="command", required=True)
        for name, entry in self.commands.items():
            cmd = sub.add_parser(name, help=entry["help"])
            for field_name, field in entry["schema"].model_fields.items():
                key = field.alias or field_name
                flag = "--" + key.replace("_", "-")
                if _is_bool(field.annotation):
                    cmd.add_argument(flag, dest=key, action="store_true", help=field.description)
                else:
                    cmd.add_argument(flag, dest=key, default=None, help=field.description)
        return parser

    def call(self, name: str, args: Dict[str, Any], ctx: Optional[CommandContext] = None) -> int:
        """Validate `args` against the command schema and run it."""
        if name not in self.commands:
            raise ValueError(f"Command {name} not found")
        entry = self.commands[name]
        present = {k: v for k, v in args.items() if v is not None}
        parsed = entry["schema"].model_validate(present)
        return entry["function"](ctx or CommandContext(), parsed)


def _is_bool(annotation: Any) -> bool:
    if annotation is bool:
        return True
    return get_origin(annotation) is Union and set(get_args(annotation)) == {bool, type(None)}
