"""Script interpreter: variables, procedures, control flow, command packages.

Values are strings throughout.  Numeric commands parse decimal text with "."
as the separator and return canonical decimal text (integers without a
point).  Execution is bounded by an evaluation budget and a recursion depth
so a runaway loop cannot hang the owning session.
"""

from __future__ import annotations

from ..errors import (
    AmbiguousCommand,
    DuplicatePackage,
    ExprSyntaxError,
    LimitExceeded,
    PnetError,
    ScriptError,
    ScriptRuntimeError,
    SimCancelled,
    UnknownCommand,
    WrongArity,
)
from .parser import (
    BraceWord,
    CmdSub,
    Command,
    Lit,
    Script,
    SegWord,
    VarRef,
    parse,
)

MAX_EVALS = 10_000_000
MAX_DEPTH = 1_000


class _Return(Exception):
    def __init__(self, value: str):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class Proc:
    def __init__(self, name: str, params: list[str], body: Script):
        self.name = name
        self.params = params
        self.body = body


class CommandRegistry:
    """Commands grouped into named packages.

    A command is addressed as "<package> <name> args..." or by bare name when
    exactly one package exports it.
    """

    def __init__(self):
        self.packages: dict[str, dict[str, callable]] = {}

    def register_package(self, name: str, commands: dict[str, callable]) -> None:
        if name in self.packages:
            raise DuplicatePackage(f"package {name!r} already registered")
        self.packages[name] = dict(commands)

    def lookup_qualified(self, package: str, command: str):
        cmds = self.packages.get(package)
        if cmds is None:
            return None
        return cmds.get(command)

    def lookup_bare(self, command: str):
        hits = [(pkg, cmds[command]) for pkg, cmds in self.packages.items()
                if command in cmds]
        if not hits:
            return None
        if len(hits) > 1:
            names = ", ".join(sorted(pkg for pkg, _ in hits))
            raise AmbiguousCommand(
                f"command {command!r} exists in several packages ({names}); qualify it")
        return hits[0][1]

    def is_package(self, name: str) -> bool:
        return name in self.packages


def need(args, n, usage):
    if len(args) != n:
        raise WrongArity(f"expected {n} argument(s): {usage}")


class Interpreter:
    """Evaluates scripts against a command registry and a variable store."""

    def __init__(self, max_evals: int = MAX_EVALS, max_depth: int = MAX_DEPTH):
        self.globals: dict[str, str] = {}
        self.frames: list[dict[str, str]] = [self.globals]
        self.procs: dict[str, Proc] = {}
        self.registry = CommandRegistry()
        self.max_evals = max_evals
        self.max_depth = max_depth
        self.evals = 0
        self._depth = 0
        self.output: list[str] = []
        self.should_cancel = None  # optional () -> bool, checked per command

    # -- variables -----------------------------------------------------------

    @property
    def scope(self) -> dict[str, str]:
        return self.frames[-1]

    def get_var(self, name: str) -> str:
        try:
            return self.scope[name]
        except KeyError:
            raise ScriptRuntimeError(f"no such variable: {name!r}") from None

    def set_var(self, name: str, value: str) -> str:
        self.scope[name] = value
        return value

    # -- evaluation ----------------------------------------------------------

    def eval_text(self, source: str) -> str:
        try:
            return self.eval_script(parse(source))
        except _Return as ret:
            return ret.value
        except _Break:
            raise ScriptRuntimeError("'break' outside a loop") from None
        except _Continue:
            raise ScriptRuntimeError("'continue' outside a loop") from None

    def eval_script(self, script: Script) -> str:
        result = ""
        for command in script.commands:
            result = self.eval_command(command)
        return result

    def eval_command(self, command: Command) -> str:
        self.evals += 1
        if self.evals > self.max_evals:
            raise LimitExceeded(
                f"evaluation budget exceeded ({self.max_evals} commands)",
                command.line, command.col)
        if self.should_cancel is not None and self.should_cancel():
            raise SimCancelled("script cancelled")
        words = [self.substitute(w) for w in command.words]
        if not words:
            return ""
        try:
            return self.dispatch(words)
        except (_Return, _Break, _Continue, ScriptError, SimCancelled):
            raise
        except PnetError as err:
            raise ScriptRuntimeError(
                f"{words[0]}: {err}", command.line, command.col) from err
        except ZeroDivisionError:
            raise ScriptRuntimeError(
                "division by zero", command.line, command.col) from None

    def dispatch(self, words: list[str]) -> str:
        name, args = words[0], words[1:]
        builtin = _BUILTINS.get(name)
        if builtin is not None:
            return builtin(self, args)
        proc = self.procs.get(name)
        if proc is not None:
            return self.call_proc(proc, args)
        if self.registry.is_package(name):
            if not args:
                raise WrongArity(f"usage: {name} <command> args...")
            handler = self.registry.lookup_qualified(name, args[0])
            if handler is None:
                raise UnknownCommand(f"package {name!r} has no command {args[0]!r}")
            return handler(self, args[1:])
        handler = self.registry.lookup_bare(name)
        if handler is not None:
            return handler(self, args)
        raise UnknownCommand(f"unknown command {name!r}")

    def call_proc(self, proc: Proc, args: list[str]) -> str:
        if len(args) != len(proc.params):
            raise WrongArity(
                f"proc {proc.name!r} expects {len(proc.params)} argument(s), "
                f"got {len(args)}")
        frame = dict(zip(proc.params, args))
        self.frames.append(frame)
        self._enter()
        try:
            return self.eval_script(proc.body)
        except _Return as ret:
            return ret.value
        finally:
            self._leave()
            self.frames.pop()

    def _enter(self):
        self._depth += 1
        if self._depth > self.max_depth:
            raise LimitExceeded(f"recursion depth exceeded ({self.max_depth})")

    def _leave(self):
        self._depth -= 1

    # -- word substitution ---------------------------------------------------

    def substitute(self, word) -> str:
        if isinstance(word, BraceWord):
            return word.text
        chunks = []
        for part in word.parts:
            if isinstance(part, Lit):
                chunks.append(part.text)
            elif isinstance(part, VarRef):
                chunks.append(self.get_var(part.name))
            else:
                chunks.append(self.eval_nested(part.script))
        return "".join(chunks)

    def eval_nested(self, script: Script) -> str:
        self._enter()
        try:
            return self.eval_script(script)
        finally:
            self._leave()

    # -- expressions ---------------------------------------------------------

    def eval_expr(self, text: str):
        """Arithmetic/comparison over decimal numbers; returns int or float."""
        return _ExprParser(text, self).parse()

    def expr_string(self, text: str) -> str:
        return format_number(self.eval_expr(text))

    def expr_bool(self, text: str) -> bool:
        return self.eval_expr(text) != 0


def format_number(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    return repr(value) if isinstance(value, float) else str(value)


def parse_number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise ScriptRuntimeError(f"expected a number, got {text!r}") from None
    return value


def parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ScriptRuntimeError(f"expected an integer, got {text!r}") from None


class _ExprParser:
    """Recursive-descent expression evaluator.

    Precedence (low to high): || ; && ; == != ; < <= > >= ; + - ; * / % ;
    unary - ! ; atoms.  "$name" reads a variable, "[script]" evaluates a
    nested script; both must yield numbers.
    """

    def __init__(self, text: str, interp: Interpreter):
        self.text = text
        self.i = 0
        self.interp = interp

    def parse(self):
        value = self.or_expr()
        self.skip_ws()
        if self.i < len(self.text):
            raise ExprSyntaxError(
                f"trailing input in expression at offset {self.i}: {self.text!r}")
        return value

    def skip_ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self, n=1) -> str:
        return self.text[self.i:self.i + n]

    def eat(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.i):
            self.i += len(token)
            return True
        return False

    def or_expr(self):
        value = self.and_expr()
        while True:
            if self.eat("||"):
                rhs = self.and_expr()
                value = 1 if (value != 0 or rhs != 0) else 0
            else:
                return value

    def and_expr(self):
        value = self.equality()
        while True:
            if self.eat("&&"):
                rhs = self.equality()
                value = 1 if (value != 0 and rhs != 0) else 0
            else:
                return value

    def equality(self):
        value = self.relational()
        while True:
            if self.eat("=="):
                value = 1 if value == self.relational() else 0
            elif self.eat("!="):
                value = 1 if value != self.relational() else 0
            else:
                return value

    def relational(self):
        value = self.additive()
        while True:
            if self.eat("<="):
                value = 1 if value <= self.additive() else 0
            elif self.eat(">="):
                value = 1 if value >= self.additive() else 0
            elif self.eat("<"):
                value = 1 if value < self.additive() else 0
            elif self.eat(">"):
                value = 1 if value > self.additive() else 0
            else:
                return value

    def additive(self):
        value = self.multiplicative()
        while True:
            if self.eat("+"):
                value = value + self.multiplicative()
            elif self.eat("-"):
                value = value - self.multiplicative()
            else:
                return value

    def multiplicative(self):
        value = self.unary()
        while True:
            if self.eat("*"):
                value = value * self.unary()
            elif self.eat("/"):
                value = self._divide(value, self.unary())
            elif self.eat("%"):
                value = self._modulo(value, self.unary())
            else:
                return value

    @staticmethod
    def _divide(a, b):
        if b == 0:
            raise ScriptRuntimeError("division by zero in expression")
        if isinstance(a, int) and isinstance(b, int):
            return a // b
        return a / b

    @staticmethod
    def _modulo(a, b):
        if b == 0:
            raise ScriptRuntimeError("division by zero in expression")
        if isinstance(a, int) and isinstance(b, int):
            return a % b
        raise ExprSyntaxError("'%' requires integer operands")

    def unary(self):
        self.skip_ws()
        if self.eat("-"):
            return -self.unary()
        if self.eat("!"):
            return 1 if self.unary() == 0 else 0
        if self.eat("+"):
            return self.unary()
        return self.atom()

    def atom(self):
        self.skip_ws()
        if self.i >= len(self.text):
            raise ExprSyntaxError(f"expression ended early: {self.text!r}")
        c = self.text[self.i]
        if c == "(":
            self.i += 1
            value = self.or_expr()
            if not self.eat(")"):
                raise ExprSyntaxError(f"missing ')' in expression: {self.text!r}")
            return value
        if c == "$":
            self.i += 1
            name = self._name()
            return parse_number(self.interp.get_var(name))
        if c == "[":
            script, end = _extract_bracket(self.text, self.i)
            self.i = end
            return parse_number(self.interp.eval_nested(parse(script)))
        if c.isdigit() or c == ".":
            return self._number()
        raise ExprSyntaxError(
            f"unexpected character {c!r} at offset {self.i} in expression {self.text!r}")

    def _name(self) -> str:
        if self.peek() == "{":
            end = self.text.find("}", self.i)
            if end < 0:
                raise ExprSyntaxError("missing '}' after '${'")
            name = self.text[self.i + 1:end]
            self.i = end + 1
            return name
        start = self.i
        while self.i < len(self.text) and (self.text[self.i].isalnum()
                                           or self.text[self.i] == "_"):
            self.i += 1
        if self.i == start:
            raise ExprSyntaxError("'$' must be followed by a variable name")
        return self.text[start:self.i]

    def _number(self):
        start = self.i
        seen_point = seen_exp = False
        while self.i < len(self.text):
            c = self.text[self.i]
            if c.isdigit():
                self.i += 1
            elif c == "." and not seen_point and not seen_exp:
                seen_point = True
                self.i += 1
            elif c in "eE" and not seen_exp and self.i > start:
                nxt = self.text[self.i + 1:self.i + 2]
                if nxt.isdigit() or nxt in "+-":
                    seen_exp = seen_point = True
                    self.i += 2 if nxt in "+-" else 1
                else:
                    break
            else:
                break
        token = self.text[start:self.i]
        try:
            return float(token) if (seen_point or seen_exp) else int(token)
        except ValueError:
            raise ExprSyntaxError(f"bad number {token!r}") from None


def _extract_bracket(text: str, start: int) -> tuple[str, int]:
    """Return (inner script text, index after closing bracket)."""
    depth = 0
    i = start
    while i < len(text):
        c = text[i]
        if c == "[":
            depth += 1
        elif c == "]":
            depth -= 1
            if depth == 0:
                return text[start + 1:i], i + 1
        i += 1
    raise ExprSyntaxError("missing ']' in expression")


# -- builtin commands --------------------------------------------------------

def _bi_set(interp: Interpreter, args):
    if len(args) == 1:
        return interp.get_var(args[0])
    if len(args) == 2:
        return interp.set_var(args[0], args[1])
    raise WrongArity("usage: set name ?value?")


def _bi_unset(interp: Interpreter, args):
    need(args, 1, "unset name")
    if interp.scope.pop(args[0], None) is None:
        raise ScriptRuntimeError(f"no such variable: {args[0]!r}")
    return ""


def _bi_incr(interp: Interpreter, args):
    if len(args) not in (1, 2):
        raise WrongArity("usage: incr name ?delta?")
    delta = parse_int(args[1]) if len(args) == 2 else 1
    value = parse_int(interp.get_var(args[0])) + delta
    return interp.set_var(args[0], str(value))


def _bi_expr(interp: Interpreter, args):
    if not args:
        raise WrongArity("usage: expr arg ?arg...?")
    return interp.expr_string(" ".join(args))


def _bi_if(interp: Interpreter, args):
    # if cond body ?elseif cond body?... ?else body?
    i = 0
    while i < len(args):
        if args[i] == "else":
            if i + 1 != len(args) - 1:
                raise WrongArity("malformed if: 'else' must be followed by one body")
            return interp.eval_nested(parse(args[i + 1]))
        if i > 0:
            if args[i] != "elseif":
                raise WrongArity("malformed if: expected 'elseif' or 'else'")
            i += 1
        if i + 1 >= len(args):
            raise WrongArity("malformed if: condition without body")
        if interp.expr_bool(args[i]):
            return interp.eval_nested(parse(args[i + 1]))
        i += 2
    return ""


def _bi_while(interp: Interpreter, args):
    need(args, 2, "while cond body")
    cond, body = args
    body_script = parse(body)
    result = ""
    while interp.expr_bool(cond):
        try:
            result = interp.eval_nested(body_script)
        except _Break:
            break
        except _Continue:
            continue
    return result


def _bi_for(interp: Interpreter, args):
    need(args, 4, "for start cond next body")
    start, cond, nxt, body = args
    interp.eval_nested(parse(start))
    body_script, next_script = parse(body), parse(nxt)
    result = ""
    while interp.expr_bool(cond):
        try:
            result = interp.eval_nested(body_script)
        except _Break:
            break
        except _Continue:
            pass
        interp.eval_nested(next_script)
    return result


def _bi_foreach(interp: Interpreter, args):
    need(args, 3, "foreach name list body")
    name, items, body = args
    body_script = parse(body)
    result = ""
    for item in items.split():
        interp.set_var(name, item)
        try:
            result = interp.eval_nested(body_script)
        except _Break:
            break
        except _Continue:
            continue
    return result


def _bi_proc(interp: Interpreter, args):
    need(args, 3, "proc name params body")
    name, params, body = args
    interp.procs[name] = Proc(name, params.split(), parse(body))
    return ""


def _bi_return(interp: Interpreter, args):
    if len(args) > 1:
        raise WrongArity("usage: return ?value?")
    raise _Return(args[0] if args else "")


def _bi_break(interp: Interpreter, args):
    need(args, 0, "break")
    raise _Break()


def _bi_continue(interp: Interpreter, args):
    need(args, 0, "continue")
    raise _Continue()


def _bi_puts(interp: Interpreter, args):
    if len(args) != 1:
        raise WrongArity("usage: puts text")
    interp.output.append(args[0])
    return ""


def _bi_eval(interp: Interpreter, args):
    if not args:
        raise WrongArity("usage: eval script ?script...?")
    return interp.eval_nested(parse(" ".join(args)))


_BUILTINS = {
    "set": _bi_set,
    "unset": _bi_unset,
    "incr": _bi_incr,
    "expr": _bi_expr,
    "if": _bi_if,
    "while": _bi_while,
    "for": _bi_for,
    "foreach": _bi_foreach,
    "proc": _bi_proc,
    "return": _bi_return,
    "break": _bi_break,
    "continue": _bi_continue,
    "puts": _bi_puts,
    "eval": _bi_eval,
}
