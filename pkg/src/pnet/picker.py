"""Label picker expressions: glob patterns plus set algebra over labels.

Grammar (operators have equal precedence and associate left; parentheses
override):

    expr    := term (("+" | "&" | "-") term)*
    term    := "(" expr ")" | pattern
    pattern := ("/" segment)+
    segment := literal-with-globs | "**"

A pattern without any glob metacharacter is a radical: it selects every
module with a label under that prefix (including the exact label).  A glob
pattern must match a whole label; "*", "?" and "[ranges]" stay within one
segment, "**" spans zero or more segments.  Matching is case-sensitive and
considers system labels as well as user labels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PickerSyntaxError
from .labels import LabelIndex

_OPS = "+&-"
_GLOB_CHARS = "*?["


@dataclass(frozen=True)
class Pattern:
    segments: tuple[str, ...]

    @property
    def is_radical(self) -> bool:
        return not any(s == "**" or any(c in s for c in _GLOB_CHARS) for s in self.segments)

    def __str__(self):
        return "/" + "/".join(self.segments)


@dataclass(frozen=True)
class SetOp:
    op: str  # "+", "&" or "-"
    left: "Pattern | SetOp"
    right: "Pattern | SetOp"

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


def tokenize(text: str):
    """Yield (kind, value, pos) with kind in {"op", "(", ")", "pattern"}."""
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield (c, c, i)
            i += 1
        elif c in _OPS:
            yield ("op", c, i)
            i += 1
        elif c == "/":
            start = i
            in_class = False
            while i < n:
                c = text[i]
                if in_class:
                    if c == "]":
                        in_class = False
                elif c == "[":
                    in_class = True
                elif c.isspace() or c in _OPS or c in "()":
                    break
                i += 1
            if in_class:
                raise PickerSyntaxError("unterminated character class", start)
            yield ("pattern", text[start:i], start)
        else:
            raise PickerSyntaxError(f"unexpected character {c!r}", i)


def _parse_pattern(text: str, pos: int) -> Pattern:
    if text.endswith("/"):
        raise PickerSyntaxError(f"pattern must not end with '/': {text!r}", pos)
    segments = text[1:].split("/")
    if any(not s for s in segments):
        raise PickerSyntaxError(f"pattern has an empty segment: {text!r}", pos)
    return Pattern(tuple(segments))


def parse_picker(text: str) -> Pattern | SetOp:
    tokens = list(tokenize(text))
    ix = 0

    def peek():
        return tokens[ix] if ix < len(tokens) else (None, None, len(text))

    def term():
        nonlocal ix
        kind, value, pos = peek()
        if kind == "(":
            ix += 1
            node = expr()
            k, _, p = peek()
            if k != ")":
                raise PickerSyntaxError("expected ')'", p)
            ix += 1
            return node
        if kind == "pattern":
            ix += 1
            return _parse_pattern(value, pos)
        raise PickerSyntaxError("expected a pattern or '('", pos)

    def expr():
        nonlocal ix
        node = term()
        while True:
            kind, value, _ = peek()
            if kind != "op":
                return node
            ix += 1
            node = SetOp(value, node, term())

    node = expr()
    kind, _, pos = peek()
    if kind is not None:
        raise PickerSyntaxError("trailing input after expression", pos)
    return node


def eval_picker(expr, index: LabelIndex) -> set[int]:
    """Evaluate a picker (text or parsed) against a label index."""
    if isinstance(expr, str):
        expr = parse_picker(expr)
    return _eval(expr, index)


def _eval(node, index: LabelIndex) -> set[int]:
    if isinstance(node, Pattern):
        if node.is_radical:
            return index.resolve_radical(str(node))
        return index.match_glob(node.segments)
    left = _eval(node.left, index)
    right = _eval(node.right, index)
    if node.op == "+":
        return left | right
    if node.op == "&":
        return left & right
    return left - right
