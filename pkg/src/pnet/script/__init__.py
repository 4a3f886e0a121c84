from .interp import Interpreter
from .parser import parse, print_script

__all__ = ["Interpreter", "parse", "print_script"]
