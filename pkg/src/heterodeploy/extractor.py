"""Kernel artifact extraction from detected matches.

For each match the extractor aligns the matched token run with the
pattern fingerprint, binds ${Pk} placeholder slots to the identifiers
the user's code actually uses at those positions, and instantiates the
pattern's kernel template. Inconsistent or partially covered bindings
are reported rather than guessed at.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lexer
from .detector import CloneMatch
from .errors import InternalError
from .lexer import IDENT_CLASS, Token
from .patterns import (FPGA, PLACEHOLDER_RE, CodePattern, PatternDB,
                       identifier_slots, template_placeholders)


class AlignmentError(InternalError):
    """A match's token run does not occur in its pattern fingerprint.

    detect() guarantees it does, so seeing this means the match was
    produced by a buggy or foreign detector."""


class UnboundPlaceholder(InternalError):
    """instantiate_kernel() met a placeholder the binding does not cover."""

    def __init__(self, index: int):
        super().__init__(f"no binding for placeholder ${{P{index}}}")
        self.index = index


@dataclass
class BindingConflict:
    """One slot observed with two different lexemes. Token indices point
    into the user's raw token list."""

    slot: str
    first_lexeme: str
    first_token_index: int
    other_lexeme: str
    other_token_index: int


@dataclass
class BindingOutcome:
    """Result of aligning a match with its pattern: the consistent slot
    bindings plus every observed inconsistency."""

    binding: dict[str, str]
    conflicts: list[BindingConflict]


@dataclass
class KernelArtifact:
    """A kernel generated for one match. When binding_complete is false
    the kernel source still contains unresolved ${Pk} placeholders and
    the artifact must not be placed on a device."""

    pattern_id: str
    device_target: str
    kernel_source: str
    binding: dict[str, str]
    binding_complete: bool
    logic_id: str | None
    source_line_range: tuple[int, int] | None
    conflicts: list[BindingConflict] = field(default_factory=list)
    missing_slots: list[str] = field(default_factory=list)


def bind_identifiers(match: CloneMatch, user_tokens: list[Token],
                     pattern: CodePattern) -> BindingOutcome:
    """Bind the pattern's identifier slots to the user's identifiers.

    The matched run aligns position-by-position with a contiguous region
    of the pattern fingerprint (the leftmost such region when several
    exist, mirroring the detector's tie-breaking). Identifier positions
    inside the region bind slot Pk to the user's lexeme; a slot seen
    with two different lexemes produces a conflict entry and is dropped
    from the binding.
    """
    snippet_tokens = lexer.tokenize(pattern.reference_snippet)
    fingerprint = lexer.normalize(snippet_tokens)
    slots = identifier_slots(snippet_tokens)
    slot_at = [slots[t.text] if t.kind == lexer.IDENT else None
               for t in snippet_tokens]

    user_seq = lexer.normalize(user_tokens)
    start, end = match.source_token_range
    run = user_seq.tokens[start:end]
    offset = _find_run(fingerprint.tokens, run)
    if offset < 0:
        raise AlignmentError(f"match for pattern {pattern.id!r} does not "
                             "align with the pattern fingerprint")

    first_seen: dict[str, tuple[str, int]] = {}
    conflicts: list[BindingConflict] = []
    for k in range(len(run)):
        if fingerprint.tokens[offset + k] != IDENT_CLASS:
            continue
        slot = f"P{slot_at[offset + k]}"
        token_index = user_seq.origin[start + k]
        lexeme = user_tokens[token_index].text
        if slot not in first_seen:
            first_seen[slot] = (lexeme, token_index)
        elif first_seen[slot][0] != lexeme:
            conflicts.append(BindingConflict(
                slot=slot,
                first_lexeme=first_seen[slot][0],
                first_token_index=first_seen[slot][1],
                other_lexeme=lexeme,
                other_token_index=token_index))

    conflicted = {c.slot for c in conflicts}
    binding = {slot: lexeme for slot, (lexeme, _) in first_seen.items()
               if slot not in conflicted}
    return BindingOutcome(binding=binding, conflicts=conflicts)


def _find_run(haystack: list[str], needle: list[str]) -> int:
    """Index of the leftmost occurrence of needle in haystack, or -1."""
    if not needle:
        return 0
    limit = len(haystack) - len(needle)
    for i in range(limit + 1):
        if haystack[i:i + len(needle)] == needle:
            return i
    return -1


def instantiate_kernel(pattern: CodePattern, binding: dict[str, str]) -> str:
    """Substitute every ${Pk} in the kernel template.

    The binding must cover every referenced placeholder; anything else
    raises UnboundPlaceholder. No other text is altered.
    """
    def replace(m):
        key = f"P{m.group(1)}"
        if key not in binding:
            raise UnboundPlaceholder(int(m.group(1)))
        return binding[key]

    return PLACEHOLDER_RE.sub(replace, pattern.kernel_template)


def _substitute_known(template: str, binding: dict[str, str]) -> str:
    """Substitute the placeholders the binding covers, keep the rest."""
    def replace(m):
        return binding.get(f"P{m.group(1)}", m.group(0))

    return PLACEHOLDER_RE.sub(replace, template)


def extract_all(matches: list[CloneMatch], user_tokens: list[Token],
                db: PatternDB) -> list[KernelArtifact]:
    """Produce one kernel artifact per match, in match order.

    Artifacts with conflicts or with template placeholders whose slots
    lie outside the matched region keep their unresolved placeholders
    and are flagged binding_complete=False; they are still listed so the
    caller can surface them.
    """
    artifacts: list[KernelArtifact] = []
    for match in matches:
        pattern = db.pattern(match.pattern_id)
        outcome = bind_identifiers(match, user_tokens, pattern)
        required = template_placeholders(pattern.kernel_template)
        conflicted = {c.slot for c in outcome.conflicts}
        missing = [f"P{k}" for k in required
                   if f"P{k}" not in outcome.binding
                   and f"P{k}" not in conflicted]
        complete = not outcome.conflicts and not missing
        if complete:
            source = instantiate_kernel(pattern, outcome.binding)
        else:
            source = _substitute_known(pattern.kernel_template, outcome.binding)
        artifacts.append(KernelArtifact(
            pattern_id=pattern.id,
            device_target=pattern.device_target,
            kernel_source=source,
            binding=outcome.binding,
            binding_complete=complete,
            logic_id=pattern.logic_id if pattern.device_target == FPGA else None,
            source_line_range=match.source_line_range,
            conflicts=outcome.conflicts,
            missing_slots=missing))
    return artifacts
