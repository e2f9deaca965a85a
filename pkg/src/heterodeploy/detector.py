"""Similar-code detection over normalized token sequences.

detect() finds, for each pattern, the longest contiguous run of token
classes the user sequence shares with the pattern fingerprint, keeps
runs that are long enough and cover enough of the pattern, and resolves
overlaps. oracle_detect() implements the same contract with a plain
dynamic program; it exists for differential testing and deliberately
shares no matching code with detect().
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .lexer import NormalizedSequence, Token

if TYPE_CHECKING:  # pragma: no cover - import only for type hints
    from .patterns import PatternDB

DEFAULT_MIN_MATCH_TOKENS = 20
DEFAULT_SIMILARITY_THRESHOLD = 0.8


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs for match admission.

    min_match_tokens is the shortest shared run worth reporting;
    similarity_threshold is the fraction of the pattern fingerprint the
    run must cover, in (0, 1].
    """

    min_match_tokens: int = DEFAULT_MIN_MATCH_TOKENS
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD

    def __post_init__(self):
        if self.min_match_tokens < 1:
            raise ValueError("min_match_tokens must be at least 1")
        if not (0.0 < self.similarity_threshold <= 1.0):
            raise ValueError("similarity_threshold must be in (0, 1]")


@dataclass
class CloneMatch:
    """One detected region: a half-open token range in the user sequence
    that reproduces a contiguous part of a pattern fingerprint."""

    pattern_id: str
    source_token_range: tuple[int, int]
    source_line_range: tuple[int, int] | None
    match_length: int
    similarity: float


class _SuffixAutomaton:
    """Suffix automaton over a token-class sequence.

    Supports streaming the longest-common-run query in O(n + m): walking
    another sequence through the automaton yields, at every position,
    the longest suffix of the walked prefix that occurs anywhere in the
    indexed sequence. min_end[state] is the smallest 0-based end
    position (inclusive) of any occurrence of that state's substrings,
    which lets the caller recover the leftmost occurrence.
    """

    def __init__(self, seq: list[str]):
        self.next: list[dict[str, int]] = [{}]
        self.link: list[int] = [-1]
        self.length: list[int] = [0]
        last = 0
        prefix_states: list[int] = []
        for ch in seq:
            last = self._extend(last, ch)
            prefix_states.append(last)

        inf = len(seq) + 1
        min_end = [inf] * len(self.length)
        for pos, state in enumerate(prefix_states):
            if pos < min_end[state]:
                min_end[state] = pos
        for state in sorted(range(len(self.length)),
                            key=self.length.__getitem__, reverse=True):
            parent = self.link[state]
            if parent >= 0 and min_end[state] < min_end[parent]:
                min_end[parent] = min_end[state]
        self.min_end = min_end

    def _add_state(self, length: int) -> int:
        self.next.append({})
        self.link.append(-1)
        self.length.append(length)
        return len(self.length) - 1

    def _extend(self, last: int, ch: str) -> int:
        cur = self._add_state(self.length[last] + 1)
        p = last
        while p != -1 and ch not in self.next[p]:
            self.next[p][ch] = cur
            p = self.link[p]
        if p == -1:
            self.link[cur] = 0
            return cur
        q = self.next[p][ch]
        if self.length[p] + 1 == self.length[q]:
            self.link[cur] = q
            return cur
        clone = self._add_state(self.length[p] + 1)
        self.next[clone] = dict(self.next[q])
        self.link[clone] = self.link[q]
        while p != -1 and self.next[p].get(ch) == q:
            self.next[p][ch] = clone
            p = self.link[p]
        self.link[q] = clone
        self.link[cur] = clone
        return cur


def longest_common_run(a: NormalizedSequence, b: NormalizedSequence) -> tuple[int, int, int]:
    """Longest contiguous run of classes common to a and b.

    Returns (length, a_start, b_start); ties prefer the smallest a_start
    and then the smallest b_start, and no common run yields (0, 0, 0).
    """
    if not a.tokens or not b.tokens:
        return (0, 0, 0)
    sa = _SuffixAutomaton(b.tokens)
    best_len = 0
    best_a_start = 0
    best_b_start = 0
    state = 0
    run = 0
    for i, ch in enumerate(a.tokens):
        while state != 0 and ch not in sa.next[state]:
            state = sa.link[state]
            run = sa.length[state]
        if ch in sa.next[state]:
            state = sa.next[state][ch]
            run += 1
        else:
            state = 0
            run = 0
        if run > best_len:
            # Find the state whose length interval contains this run so
            # min_end describes exactly the matched substring.
            cur = state
            while sa.link[cur] != -1 and sa.length[sa.link[cur]] >= run:
                cur = sa.link[cur]
            best_len = run
            best_a_start = i - run + 1
            best_b_start = sa.min_end[cur] - run + 1
    return (best_len, best_a_start, best_b_start)


def detect(user_seq: NormalizedSequence, db: "PatternDB", cfg: DetectorConfig,
           raw_tokens: list[Token] | None = None) -> list[CloneMatch]:
    """Match every pattern fingerprint against the user sequence.

    At most one match per pattern (its longest shared run) survives the
    length and similarity thresholds; overlapping survivors are resolved
    in favor of higher similarity, then longer match, then smaller
    pattern id. Results are ordered by where they start in the source.
    When raw_tokens is given, source line ranges are derived from it.
    """
    candidates: list[CloneMatch] = []
    for pattern in db.patterns:
        fingerprint = db.fingerprints[pattern.id]
        length, a_start, _ = longest_common_run(user_seq, fingerprint)
        if length < cfg.min_match_tokens:
            continue
        similarity = length / len(fingerprint.tokens)
        if similarity < cfg.similarity_threshold:
            continue
        candidates.append(_make_match(pattern.id, a_start, length, similarity,
                                      user_seq, raw_tokens))

    ranked = sorted(candidates,
                    key=lambda m: (-m.similarity, -m.match_length, m.pattern_id))
    kept: list[CloneMatch] = []
    for cand in ranked:
        if all(not _overlap(cand.source_token_range, k.source_token_range)
               for k in kept):
            kept.append(cand)
    kept.sort(key=lambda m: m.source_token_range[0])
    return kept


def _make_match(pattern_id: str, start: int, length: int, similarity: float,
                user_seq: NormalizedSequence,
                raw_tokens: list[Token] | None) -> CloneMatch:
    line_range = None
    if raw_tokens is not None:
        first = raw_tokens[user_seq.origin[start]]
        last = raw_tokens[user_seq.origin[start + length - 1]]
        line_range = (first.line, last.line)
    return CloneMatch(pattern_id=pattern_id,
                      source_token_range=(start, start + length),
                      source_line_range=line_range,
                      match_length=length,
                      similarity=similarity)


def _overlap(r1: tuple[int, int], r2: tuple[int, int]) -> bool:
    return r1[0] < r2[1] and r2[0] < r1[1]


def oracle_detect(user_seq: NormalizedSequence, db: "PatternDB", cfg: DetectorConfig,
                  raw_tokens: list[Token] | None = None) -> list[CloneMatch]:
    """Reference implementation of detect()'s contract.

    Uses a row-by-row dynamic program for the longest common run and an
    eliminate-the-best loop for overlap resolution. Kept deliberately
    free of code shared with detect() so the two can check each other.
    """
    chosen: list[CloneMatch] = []
    for pattern in db.patterns:
        fingerprint = db.fingerprints[pattern.id]
        length, a_start, _ = _dp_longest_run(user_seq.tokens, fingerprint.tokens)
        if length < cfg.min_match_tokens:
            continue
        similarity = length / len(fingerprint.tokens)
        if similarity < cfg.similarity_threshold:
            continue
        chosen.append(_make_match(pattern.id, a_start, length, similarity,
                                  user_seq, raw_tokens))

    result: list[CloneMatch] = []
    remaining = list(chosen)
    while remaining:
        best = remaining[0]
        for cand in remaining[1:]:
            if cand.similarity > best.similarity:
                best = cand
            elif cand.similarity == best.similarity:
                if cand.match_length > best.match_length:
                    best = cand
                elif (cand.match_length == best.match_length
                        and cand.pattern_id < best.pattern_id):
                    best = cand
        result.append(best)
        survivors = []
        for cand in remaining:
            if cand is best:
                continue
            b0, b1 = best.source_token_range
            c0, c1 = cand.source_token_range
            if not (c0 < b1 and b0 < c1):
                survivors.append(cand)
        remaining = survivors
    result.sort(key=lambda m: m.source_token_range[0])
    return result


def _dp_longest_run(a: list[str], b: list[str]) -> tuple[int, int, int]:
    """O(n*m) longest common contiguous run with the same tie-breaking
    rules as longest_common_run(): smallest a_start, then smallest
    b_start. Rows are vectorized with numpy to keep big differential
    runs affordable."""
    if not a or not b:
        return (0, 0, 0)
    codes: dict[str, int] = {}
    for cls in a:
        codes.setdefault(cls, len(codes))
    for cls in b:
        codes.setdefault(cls, len(codes))
    a_codes = [codes[cls] for cls in a]
    b_arr = np.array([codes[cls] for cls in b], dtype=np.int32)

    prev = np.zeros(len(b) + 1, dtype=np.int32)
    curr = np.zeros(len(b) + 1, dtype=np.int32)
    best_len = 0
    best_a_start = 0
    best_b_start = 0
    for i, code in enumerate(a_codes):
        curr[1:] = np.where(b_arr == code, prev[:-1] + 1, 0)
        row_max = int(curr.max())
        if row_max > best_len:
            end = int(curr.argmax())  # first (leftmost) maximal end
            best_len = row_max
            best_a_start = i - row_max + 1
            best_b_start = end - row_max
        prev, curr = curr, prev
    return (best_len, best_a_start, best_b_start)
