"""
Tests for the command registry.
"""

import io
import sys
from typing import Optional

import pytest
from pydantic import Field, ValidationError

from src.models import CommandArgs, Rational
from src.registry import CommandContext, CommandRegistry


class EchoArgs(CommandArgs):
    t: Rational = Field(..., description="Stretch bound")
    label: Optional[str] = Field(None, description="Free text")
    loud: bool = Field(False, description="Upper-case the output")


@pytest.fixture
def registry():
    """Registry with a single echo command."""
    reg = CommandRegistry("test-tool")

    @reg.command(name="echo", schema=EchoArgs)
    def echo(ctx: CommandContext, args: EchoArgs) -> int:
        """Write t and the label."""
        text = f"{args.t} {args.label or ''}".strip()
        ctx.stdout.write(text.upper() if args.loud else text)
        return 0

    return reg


class TestCommandContext:
    """Test cases for the execution context."""

    def test_defaults_to_process_streams(self):
        ctx = CommandContext()
        assert ctx.stdout is sys.stdout
        assert ctx.stderr is sys.stderr

    def test_holds_only_streams(self):
        out, err = io.StringIO(), io.StringIO()
        ctx = CommandContext(stdout=out, stderr=err)
        assert vars(ctx) == {"stdout": out, "stderr": err}


class TestCommandRegistry:
    """Test cases for registration, parsing and dispatch."""

    def test_registration(self, registry):
        entry = registry.commands["echo"]
        assert entry["schema"] is EchoArgs
        assert entry["help"] == "Write t and the label."

    def test_parser_flags_from_schema(self, registry):
        ns = registry.build_parser().parse_args(["echo", "--t", "3/2", "--loud", "--json"])
        assert ns.command == "echo"
        assert ns.t == "3/2"
        assert ns.loud is True
        assert ns.json is True
        assert ns.label is None

    def test_call_validates_and_writes_to_context(self, registry):
        out = io.StringIO()
        code = registry.call("echo", {"t": "3/2", "label": "hi", "loud": True}, CommandContext(stdout=out))
        assert code == 0
        assert out.getvalue() == "3/2 HI"

    def test_call_rejects_invalid_arguments(self, registry):
        with pytest.raises(ValidationError):
            registry.call("echo", {"t": "abc"}, CommandContext(stdout=io.StringIO()))

    def test_unknown_command(self, registry):
        with pytest.raises(ValueError, match="not found"):
            registry.call("missing", {})
