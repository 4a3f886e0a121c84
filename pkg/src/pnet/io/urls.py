"""The "pnet:" URL scheme used by links inside bench notes.

Three actions exist: select (query parameter picker=), goto (module=), and
run (script=).  Anything not starting with "pnet:" is an external link and
is rejected with BadScheme so callers can hand it to the platform instead.
Values are percent-decoded with unquote, not unquote_plus, so a literal "+"
(the picker union operator) survives unencoded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser
from urllib.parse import unquote

from ..errors import BadScheme, MissingParameter, PnetError
from ..picker import parse_picker

SCHEME = "pnet:"
ACTIONS = ("select", "goto", "run")


@dataclass(frozen=True)
class AppUrl:
    action: str
    params: dict = field(default_factory=dict)

    @property
    def picker(self) -> str:
        return self.params["picker"]

    @property
    def module(self) -> int:
        return int(self.params["module"])

    @property
    def script(self) -> str:
        return self.params["script"]


def parse_app_url(text: str) -> AppUrl:
    """Parse and validate an app URL; the picker is syntax-checked here."""
    if not text.startswith(SCHEME):
        raise BadScheme(f"not a {SCHEME} URL: {text!r}")
    rest = text[len(SCHEME):]
    action, _, query = rest.partition("?")
    if action not in ACTIONS:
        raise BadScheme(f"unknown action {action!r} (want one of {', '.join(ACTIONS)})")

    params: dict[str, str] = {}
    if query:
        for piece in query.split("&"):
            if not piece:
                continue
            key, _, value = piece.partition("=")
            params[unquote(key)] = unquote(value)

    required = {"select": "picker", "goto": "module", "run": "script"}[action]
    if required not in params or params[required] == "":
        raise MissingParameter(f"action {action} needs a {required}= parameter")
    if action == "select":
        parse_picker(params["picker"])  # PickerSyntaxError on bad syntax
    elif action == "goto":
        try:
            int(params["module"])
        except ValueError:
            raise MissingParameter(
                f"module parameter must be an integer id, got {params['module']!r}") from None
    return AppUrl(action, params)


class _HrefCollector(HTMLParser):
    def __init__(self):
        super().__init__()
        self.hrefs: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value is not None:
                    self.hrefs.append(value)


@dataclass
class NoteLinks:
    app: list[AppUrl]                  # parsed pnet: links
    external: list[str]                # other schemes, for the platform opener
    broken: list[tuple[str, str]]      # (href, reason) for malformed pnet: links


def note_links(html: str) -> NoteLinks:
    """Extract links from note HTML; never raises, broken links are flagged."""
    collector = _HrefCollector()
    try:
        collector.feed(html)
        collector.close()
    except Exception:
        pass  # truncated markup keeps whatever was collected
    result = NoteLinks([], [], [])
    for href in collector.hrefs:
        if not href.startswith(SCHEME):
            result.external.append(href)
            continue
        try:
            result.app.append(parse_app_url(href))
        except PnetError as exc:
            result.broken.append((href, str(exc)))
    return result
