"""Hierarchical labels and the label index.

A label is a "/"-separated path targeting exactly one module.  Every module
gets one permanent system label (under the reserved "/m" radical) plus any
number of user labels.  Sharing a radical (segment-wise prefix) is what makes
a set of modules a sub-network; the index keeps a radix tree over segments so
radical queries stay cheap at 10^5 labels.
"""

from __future__ import annotations

import re

from .errors import LabelTaken, MalformedLabel, SystemLabelProtected, UnknownLabel

# Segments exclude whitespace and every character the picker grammar uses.
RESERVED_CHARS = "/*?[]()+&-|"
_SEGMENT_RE = re.compile(r"[^\s/*?\[\]()+&\-|]+")

# First segment of every system label; rejected in user labels so a loaded
# document can always re-derive system labels without collisions.
SYSTEM_RADICAL = "m"


def split_label(text: str) -> tuple[str, ...]:
    """Split a label into segments, raising MalformedLabel on any violation."""
    if not isinstance(text, str) or not text.startswith("/"):
        raise MalformedLabel(f"label must start with '/': {text!r}")
    if text.endswith("/"):
        raise MalformedLabel(f"label must not end with '/': {text!r}")
    segments = text[1:].split("/")
    for seg in segments:
        if not seg:
            raise MalformedLabel(f"label has an empty segment: {text!r}")
        if not _SEGMENT_RE.fullmatch(seg):
            raise MalformedLabel(
                f"segment {seg!r} contains whitespace or a reserved character ({RESERVED_CHARS})")
    return tuple(segments)


def system_label(module_id: int) -> str:
    return f"/{SYSTEM_RADICAL}/{module_id}"


class _Node:
    __slots__ = ("children", "terminal")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.terminal: int | None = None  # module id whose label ends here


class LabelIndex:
    """Bidirectional label map with segment-wise radical queries."""

    def __init__(self):
        self._root = _Node()
        self._by_label: dict[str, int] = {}
        self._by_module: dict[int, set[str]] = {}
        self._system: dict[int, str] = {}

    # -- registration -------------------------------------------------------

    def register_system(self, module_id: int) -> str:
        label = system_label(module_id)
        self._insert(label, (SYSTEM_RADICAL, str(module_id)), module_id)
        self._system[module_id] = label
        return label

    def add(self, module_id: int, text: str) -> None:
        segments = split_label(text)
        if segments[0] == SYSTEM_RADICAL:
            raise MalformedLabel(f"the '/{SYSTEM_RADICAL}' radical is reserved for system labels")
        self._insert(text, segments, module_id)

    def _insert(self, text: str, segments, module_id: int) -> None:
        existing = self._by_label.get(text)
        if existing is not None:
            if existing == module_id:
                return
            raise LabelTaken(f"label {text!r} already targets module {existing}")
        node = self._root
        for seg in segments:
            node = node.children.setdefault(seg, _Node())
        node.terminal = module_id
        self._by_label[text] = module_id
        self._by_module.setdefault(module_id, set()).add(text)

    # -- removal ------------------------------------------------------------

    def remove(self, text: str) -> None:
        module_id = self._by_label.get(text)
        if module_id is None:
            raise UnknownLabel(f"no such label: {text!r}")
        if self._system.get(module_id) == text:
            raise SystemLabelProtected(f"{text!r} is a permanent system label")
        self._delete(text, split_label(text))

    def drop_module(self, module_id: int) -> None:
        """Remove every label of a module (the module itself is being deleted)."""
        for text in list(self._by_module.get(module_id, ())):
            self._delete(text, split_label(text))
        self._system.pop(module_id, None)

    def _delete(self, text: str, segments) -> None:
        module_id = self._by_label.pop(text)
        labels = self._by_module[module_id]
        labels.discard(text)
        if not labels:
            del self._by_module[module_id]
        # Walk down recording the path, then prune empty nodes bottom-up.
        path = [(None, self._root)]
        node = self._root
        for seg in segments:
            node = node.children[seg]
            path.append((seg, node))
        node.terminal = None
        for (seg, child), (_, parent) in zip(reversed(path[1:]), reversed(path[:-1])):
            if child.terminal is None and not child.children:
                del parent.children[seg]
            else:
                break

    # -- queries ------------------------------------------------------------

    def target(self, text: str) -> int | None:
        return self._by_label.get(text)

    def labels_of(self, module_id: int) -> list[str]:
        """System label first, then user labels in lexicographic order."""
        labels = self._by_module.get(module_id, set())
        system = self._system.get(module_id)
        users = sorted(l for l in labels if l != system)
        return ([system] if system is not None else []) + users

    def all_labels(self):
        return self._by_label.items()

    def __len__(self):
        return len(self._by_label)

    def modules(self) -> set[int]:
        return set(self._by_module)

    def _walk(self, segments) -> _Node | None:
        node = self._root
        for seg in segments:
            node = node.children.get(seg)
            if node is None:
                return None
        return node

    def resolve_radical(self, radical: str) -> set[int]:
        """Modules having at least one label whose segment-wise prefix is `radical`.

        An unknown radical yields the empty set; a malformed one raises.
        """
        segments = split_label(radical)
        node = self._walk(segments)
        if node is None:
            return set()
        out: set[int] = set()
        self._collect(node, out)
        return out

    @staticmethod
    def _collect(node: _Node, out: set[int]) -> None:
        stack = [node]
        while stack:
            n = stack.pop()
            if n.terminal is not None:
                out.add(n.terminal)
            stack.extend(n.children.values())

    def match_glob(self, pattern_segments) -> set[int]:
        """Modules with a label matching the glob pattern (full-label match).

        Plain segments match per fnmatch (*, ?, [ranges], no '/' involved);
        the segment "**" matches zero or more whole segments.
        """
        from fnmatch import fnmatchcase

        out: set[int] = set()
        seen: set[tuple[int, int]] = set()

        def descend(node: _Node, i: int) -> None:
            key = (id(node), i)
            if key in seen:
                return
            seen.add(key)
            if i == len(pattern_segments):
                if node.terminal is not None:
                    out.add(node.terminal)
                return
            pat = pattern_segments[i]
            if pat == "**":
                descend(node, i + 1)
                for child in node.children.values():
                    descend(child, i)
            elif any(c in pat for c in "*?["):
                for seg, child in node.children.items():
                    if fnmatchcase(seg, pat):
                        descend(child, i + 1)
            else:
                child = node.children.get(pat)
                if child is not None:
                    descend(child, i + 1)

        descend(self._root, 0)
        return out
