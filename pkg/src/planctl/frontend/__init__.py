from .ast import Script
from .parser import ScriptError, parse_script, tokenize
from .printer import format_script
from .validate import Diagnostic, validate

__all__ = ["Script", "ScriptError", "parse_script", "tokenize", "format_script",
           "Diagnostic", "validate"]
