"""Script grammar: words, braces, brackets, variables.

A script is a list of commands separated by newlines or ";".  A command is a
list of words.  Word forms:

  bare        characters up to whitespace or a separator; may embed $var and
              [script] substitutions
  "quoted"    like bare but whitespace and separators lose their meaning
  {braced}    verbatim text, no substitution, braces nest
  [script]    replaced by the result of evaluating the nested script
  $name       replaced by the variable's value ("${name}" for odd names)

"#" where a command could start begins a comment to end of line.  Backslash
escapes the next character in bare and quoted words; backslash-newline is a
word-internal line continuation.  Inside braces backslash keeps escaped
braces out of the balance count but stays in the text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import EmptyVariableName, UnbalancedBrace, UnbalancedBracket

_WORD_END = " \t\r\n;"
_NAME_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"


# -- AST ---------------------------------------------------------------------
# Positions are carried for error reporting but excluded from equality so the
# parse/print round trip compares structurally.

@dataclass(frozen=True)
class Lit:
    text: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class CmdSub:
    script: "Script"


@dataclass(frozen=True)
class BraceWord:
    text: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SegWord:
    parts: tuple  # of Lit | VarRef | CmdSub
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Word = BraceWord | SegWord


@dataclass(frozen=True)
class Command:
    words: tuple[Word, ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Script:
    commands: tuple[Command, ...]


class _Cursor:
    """Character cursor with line/column tracking."""

    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.i >= len(self.text)

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def advance(self) -> str:
        c = self.text[self.i]
        self.i += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def pos(self):
        return self.line, self.col


def parse(source: str) -> Script:
    cur = _Cursor(source)
    commands = _parse_commands(cur, stop=None)
    return Script(tuple(commands))


def _parse_commands(cur: _Cursor, stop: str | None) -> list[Command]:
    """Parse commands until EOF or the `stop` character (consumed)."""
    commands: list[Command] = []
    while True:
        # Skip separators and whitespace between commands.
        while not cur.eof() and cur.peek() in " \t\r\n;":
            cur.advance()
        if not cur.eof() and cur.peek() == "#":
            while not cur.eof() and cur.peek() != "\n":
                cur.advance()
            continue
        if cur.eof():
            if stop is not None:
                raise UnbalancedBracket("missing ']'", cur.line, cur.col)
            return commands
        if stop is not None and cur.peek() == stop:
            cur.advance()
            return commands
        commands.append(_parse_command(cur, stop))


def _parse_command(cur: _Cursor, stop: str | None) -> Command:
    line, col = cur.pos()
    words: list[Word] = []
    while True:
        while not cur.eof():
            c = cur.peek()
            if c in " \t":
                cur.advance()
            elif c == "\\" and cur.text[cur.i + 1:cur.i + 2] == "\n":
                cur.advance()  # line continuation acts as a word separator
                cur.advance()
            else:
                break
        if cur.eof() or cur.peek() in "\n;\r":
            break
        if stop is not None and cur.peek() == stop:
            break
        words.append(_parse_word(cur, stop))
    return Command(tuple(words), line, col)


def _parse_word(cur: _Cursor, stop: str | None) -> Word:
    line, col = cur.pos()
    c = cur.peek()
    if c == "{":
        return _parse_brace(cur, line, col)
    if c == '"':
        return _parse_quoted(cur, line, col)
    return _parse_bare(cur, line, col, stop)


def _parse_brace(cur: _Cursor, line: int, col: int) -> BraceWord:
    cur.advance()  # opening brace
    depth = 1
    chars: list[str] = []
    while True:
        if cur.eof():
            raise UnbalancedBrace("missing '}'", line, col)
        c = cur.advance()
        if c == "\\" and not cur.eof():
            chars.append(c)
            chars.append(cur.advance())
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return BraceWord("".join(chars), line, col)
        chars.append(c)


def _parse_quoted(cur: _Cursor, line: int, col: int) -> SegWord:
    cur.advance()  # opening quote
    parts: list = []
    buf: list[str] = []

    def flush():
        if buf:
            parts.append(Lit("".join(buf)))
            buf.clear()

    while True:
        if cur.eof():
            raise UnbalancedBrace('missing closing \'"\'', line, col)
        c = cur.peek()
        if c == '"':
            cur.advance()
            flush()
            return SegWord(tuple(parts), line, col)
        if c == "\\":
            cur.advance()
            buf.append(_escape(cur))
        elif c == "$":
            flush()
            parts.append(_parse_var(cur))
        elif c == "[":
            flush()
            parts.append(_parse_bracket(cur))
        else:
            buf.append(cur.advance())


def _parse_bare(cur: _Cursor, line: int, col: int, stop: str | None) -> SegWord:
    parts: list = []
    buf: list[str] = []

    def flush():
        if buf:
            parts.append(Lit("".join(buf)))
            buf.clear()

    while not cur.eof():
        c = cur.peek()
        if c in _WORD_END or (stop is not None and c == stop):
            break
        if c == "\\":
            if cur.text[cur.i + 1:cur.i + 2] == "\n":
                break  # continuation ends the word; command loop consumes it
            cur.advance()
            buf.append(_escape(cur))
        elif c == "$":
            flush()
            parts.append(_parse_var(cur))
        elif c == "[":
            flush()
            parts.append(_parse_bracket(cur))
        else:
            buf.append(cur.advance())
    flush()
    return SegWord(tuple(parts), line, col)


def _escape(cur: _Cursor) -> str:
    if cur.eof():
        return "\\"
    c = cur.advance()
    return {"n": "\n", "t": "\t", "r": "\r", "\n": " "}.get(c, c)


def _parse_var(cur: _Cursor) -> VarRef:
    line, col = cur.pos()
    cur.advance()  # "$"
    if cur.peek() == "{":
        cur.advance()
        chars: list[str] = []
        while True:
            if cur.eof():
                raise UnbalancedBrace("missing '}' in ${...}", line, col)
            c = cur.advance()
            if c == "}":
                break
            chars.append(c)
        name = "".join(chars)
    else:
        chars = []
        while not cur.eof() and cur.peek() in _NAME_CHARS:
            chars.append(cur.advance())
        name = "".join(chars)
    if not name:
        raise EmptyVariableName("'$' must be followed by a variable name", line, col)
    return VarRef(name)


def _parse_bracket(cur: _Cursor) -> CmdSub:
    line, col = cur.pos()
    cur.advance()  # "["
    try:
        commands = _parse_commands(cur, stop="]")
    except UnbalancedBracket:
        raise UnbalancedBracket("missing ']'", line, col) from None
    return CmdSub(Script(tuple(commands)))


# -- printing ----------------------------------------------------------------

_BARE_SPECIALS = set(' \t\r\n;#"$[]{}\\')  # "]" matters when nested in brackets


def print_script(script: Script, sep: str = "\n") -> str:
    return sep.join(_print_command(c) for c in script.commands)


def _print_command(cmd: Command) -> str:
    return " ".join(_print_word(w) for w in cmd.words)


def _print_word(word: Word) -> str:
    if isinstance(word, BraceWord):
        return "{" + word.text + "}"
    if len(word.parts) == 1 and isinstance(word.parts[0], Lit):
        text = word.parts[0].text
        if text and not (set(text) & _BARE_SPECIALS):
            return text
    return '"' + "".join(_print_part(p) for p in word.parts) + '"'


def _print_part(part) -> str:
    if isinstance(part, Lit):
        out = []
        for c in part.text:
            if c in '\\"$[':
                out.append("\\" + c)
            elif c == "\n":
                out.append("\\n")
            elif c == "\t":
                out.append("\\t")
            else:
                out.append(c)
        return "".join(out)
    if isinstance(part, VarRef):
        if part.name and all(c in _NAME_CHARS for c in part.name):
            return "$" + part.name
        return "${" + part.name + "}"
    return "[" + print_script(part.script, sep="; ") + "]"
