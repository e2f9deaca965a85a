"""File-backed database of offloadable code patterns.

A pattern pairs a reference snippet (C subset) with a device target and
an OpenCL-style kernel template. Template placeholders ${Pk} refer to
the snippet's k-th distinct identifier, counted from 1 in order of
first appearance. FPGA patterns also name the logic the device must be
configured with.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import jsonio, lexer
from .detector import DEFAULT_MIN_MATCH_TOKENS
from .errors import InputError, SchemaError
from .lexer import NormalizedSequence, Token

GPU = "GPU"
FPGA = "FPGA"
DEVICE_TARGETS = (GPU, FPGA)

PLACEHOLDER_RE = re.compile(r"\$\{P(\d+)\}")

_REQUIRED_FIELDS = ("id", "name", "device_target", "reference_snippet",
                    "kernel_template")
_OPTIONAL_FIELDS = ("logic_id", "notes")


class PatternError(InputError):
    """Problem with a specific pattern; carries the offending id."""

    def __init__(self, pattern_id: str, message: str):
        super().__init__(f"pattern {pattern_id!r}: {message}")
        self.pattern_id = pattern_id


class DuplicateId(PatternError):
    pass


class SnippetLexError(PatternError):
    pass


class PlaceholderOutOfRange(PatternError):
    pass


class MissingLogicId(PatternError):
    pass


@dataclass
class CodePattern:
    """One offloadable pattern."""

    id: str
    name: str
    device_target: str
    reference_snippet: str
    kernel_template: str
    logic_id: str | None = None
    notes: str = ""


@dataclass
class PatternDB:
    """Validated patterns plus their precomputed fingerprints."""

    patterns: list[CodePattern] = field(default_factory=list)
    fingerprints: dict[str, NormalizedSequence] = field(default_factory=dict)

    def pattern(self, pattern_id: str) -> CodePattern:
        for p in self.patterns:
            if p.id == pattern_id:
                return p
        raise InputError(f"unknown pattern id {pattern_id!r}")

    def logic_ids(self) -> list[str]:
        """Sorted universe of FPGA logic ids known to this database."""
        return sorted({p.logic_id for p in self.patterns if p.logic_id})


def identifier_slots(tokens: list[Token]) -> dict[str, int]:
    """Number distinct identifier lexemes 1.. in first-appearance order."""
    slots: dict[str, int] = {}
    for tok in tokens:
        if tok.kind == lexer.IDENT and tok.text not in slots:
            slots[tok.text] = len(slots) + 1
    return slots


def template_placeholders(template: str) -> list[int]:
    """Sorted distinct placeholder indices referenced by a template.

    Any '${' that does not open a well-formed ${Pk} placeholder is a
    schema violation.
    """
    indices: set[int] = set()
    pos = 0
    while True:
        pos = template.find("${", pos)
        if pos < 0:
            break
        m = PLACEHOLDER_RE.match(template, pos)
        if m is None:
            raise SchemaError(f"malformed placeholder at offset {pos}, "
                              "expected ${Pk}")
        indices.add(int(m.group(1)))
        pos = m.end()
    return sorted(indices)


def validate_pattern(pattern: CodePattern,
                     min_snippet_tokens: int = DEFAULT_MIN_MATCH_TOKENS) -> list[Token]:
    """Check one pattern's invariants; returns the snippet's tokens."""
    if not pattern.id:
        raise SchemaError("pattern id must be a non-empty string")
    if pattern.device_target not in DEVICE_TARGETS:
        raise SchemaError(f"pattern {pattern.id!r}: device_target must be one "
                          f"of {', '.join(DEVICE_TARGETS)}, "
                          f"got {pattern.device_target!r}")
    if pattern.device_target == FPGA and not pattern.logic_id:
        raise MissingLogicId(pattern.id, "FPGA patterns must carry a logic_id")
    if pattern.device_target == GPU and pattern.logic_id is not None:
        raise SchemaError(f"pattern {pattern.id!r}: GPU patterns must not "
                          "carry a logic_id")
    try:
        tokens = lexer.tokenize(pattern.reference_snippet)
    except lexer.LexError as exc:
        raise SnippetLexError(pattern.id, f"reference snippet does not lex: {exc}") from exc
    if len(tokens) < min_snippet_tokens:
        raise SchemaError(f"pattern {pattern.id!r}: reference snippet has "
                          f"{len(tokens)} tokens, need at least {min_snippet_tokens}")
    slot_count = len(identifier_slots(tokens))
    try:
        referenced = template_placeholders(pattern.kernel_template)
    except SchemaError as exc:
        raise SchemaError(f"pattern {pattern.id!r}: {exc}") from exc
    for index in referenced:
        if not (1 <= index <= slot_count):
            raise PlaceholderOutOfRange(
                pattern.id,
                f"${{P{index}}} is out of range; the snippet defines "
                f"{slot_count} distinct identifiers")
    return tokens


def load_pattern_db(path,
                    min_snippet_tokens: int = DEFAULT_MIN_MATCH_TOKENS) -> PatternDB:
    """Load and validate a pattern database file."""
    data = jsonio.read(path)
    return parse_pattern_db(data, min_snippet_tokens=min_snippet_tokens)


def parse_pattern_db(data,
                     min_snippet_tokens: int = DEFAULT_MIN_MATCH_TOKENS) -> PatternDB:
    """Validate an already-parsed pattern database document."""
    if not isinstance(data, dict):
        raise SchemaError("pattern database must be a JSON object")
    unknown = set(data) - {"version", "patterns"}
    if unknown:
        raise SchemaError(f"pattern database has unknown fields: "
                          f"{', '.join(sorted(unknown))}")
    if data.get("version") != 1:
        raise SchemaError(f"unsupported pattern database version "
                          f"{data.get('version')!r}, expected 1")
    entries = data.get("patterns")
    if not isinstance(entries, list):
        raise SchemaError("'patterns' must be a list")

    db = PatternDB()
    for entry in entries:
        pattern = _parse_entry(entry)
        if pattern.id in db.fingerprints:
            raise DuplicateId(pattern.id, "pattern id appears more than once")
        tokens = validate_pattern(pattern, min_snippet_tokens=min_snippet_tokens)
        db.patterns.append(pattern)
        db.fingerprints[pattern.id] = lexer.normalize(tokens)
    return db


def _parse_entry(entry) -> CodePattern:
    if not isinstance(entry, dict):
        raise SchemaError("each pattern must be a JSON object")
    label = entry.get("id") if isinstance(entry.get("id"), str) else "<missing id>"
    unknown = set(entry) - set(_REQUIRED_FIELDS) - set(_OPTIONAL_FIELDS)
    if unknown:
        raise SchemaError(f"pattern {label!r}: unknown fields: "
                          f"{', '.join(sorted(unknown))}")
    for name in _REQUIRED_FIELDS:
        if name not in entry:
            raise SchemaError(f"pattern {label!r}: missing field {name!r}")
        if not isinstance(entry[name], str):
            raise SchemaError(f"pattern {label!r}: field {name!r} must be a string")
    logic_id = entry.get("logic_id")
    if logic_id is not None and not isinstance(logic_id, str):
        raise SchemaError(f"pattern {label!r}: field 'logic_id' must be a string")
    notes = entry.get("notes", "")
    if not isinstance(notes, str):
        raise SchemaError(f"pattern {label!r}: field 'notes' must be a string")
    return CodePattern(id=entry["id"], name=entry["name"],
                       device_target=entry["device_target"],
                       reference_snippet=entry["reference_snippet"],
                       kernel_template=entry["kernel_template"],
                       logic_id=logic_id, notes=notes)


def render_pattern_db(db: PatternDB) -> str:
    """Serialize a database back to its canonical JSON file form.

    Loading the result yields an equal PatternDB, and rendering a loaded
    canonical file reproduces its bytes.
    """
    return jsonio.dumps(pattern_db_to_dict(db))


def pattern_db_to_dict(db: PatternDB) -> dict:
    entries = []
    for p in db.patterns:
        entry = {
            "id": p.id,
            "name": p.name,
            "device_target": p.device_target,
            "reference_snippet": p.reference_snippet,
            "kernel_template": p.kernel_template,
        }
        if p.logic_id is not None:
            entry["logic_id"] = p.logic_id
        if p.notes:
            entry["notes"] = p.notes
        entries.append(entry)
    return {"version": 1, "patterns": entries}


def save_pattern_db(db: PatternDB, path) -> None:
    jsonio.write(path, pattern_db_to_dict(db))


def seed_database_path() -> Path:
    """Path of the pattern database shipped with the package."""
    return Path(str(resources.files("heterodeploy").joinpath("data/seed_patterns.json")))
