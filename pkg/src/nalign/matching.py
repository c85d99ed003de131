"""Turn per-entity candidate similarities into 1-to-1 alignments.

Construction builds per-source ordered top-k lists; both sides then see the
same sentence objects, so removing a sentence removes it from both views at
once.  Matching walks lists in preference order (descending expectation, ties
by ascending partner id), claiming the first candidate that prefers the
walker back, and prunes everything else a matched entity offered.  A final
swap pass repairs crossed pairs whenever exchanging partners raises the total
expectation.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .truth import TruthValue


@dataclass(slots=True)
class MatchSentence:
    """One candidate alignment as seen by both sides' lists."""

    left: int
    right: int
    tv: TruthValue
    alive: bool = True

    @property
    def expectation(self) -> float:
        return self.tv.f * self.tv.c

    def partner(self, me: int) -> int:
        return self.right if me == self.left else self.left


def _left_key(s: MatchSentence):
    return (-s.expectation, s.right)


def _right_key(s: MatchSentence):
    return (-s.expectation, s.left)


@dataclass(slots=True)
class CandidateList:
    """Descending-expectation list, deterministic tie order, length <= k."""

    owner: int
    k: int
    entries: list[MatchSentence] = field(default_factory=list)

    def insert(self, sentence: MatchSentence) -> None:
        insort(self.entries, sentence, key=_left_key)
        if len(self.entries) > self.k:
            self.entries.pop()

    def alive_entries(self) -> list[MatchSentence]:
        return [s for s in self.entries if s.alive]


def insert_topk(lst: CandidateList, sentence: MatchSentence) -> None:
    lst.insert(sentence)


def filter_range(
    sentences: Iterable[MatchSentence],
    a1: Optional[set[int]],
    a2: Optional[set[int]],
) -> list[MatchSentence]:
    """Keep a pair only if it is entirely inside or entirely outside the
    declared alignable ranges.  Disabled (None) ranges pass everything."""
    if a1 is None or a2 is None:
        return list(sentences)
    return [s for s in sentences if (s.left in a1) == (s.right in a2)]


@dataclass(slots=True)
class MatchResult:
    pairs: list[tuple[int, int, TruthValue]]
    unmatched: set[int]

    def as_dict(self) -> dict[int, int]:
        return {e1: e2 for e1, e2, _ in self.pairs}


@dataclass(slots=True)
class _Frame:
    e: int
    e_prev: Optional[int]
    tried: set[int] = field(default_factory=set)
    awaiting: Optional[MatchSentence] = None


_PENDING = object()


class _Matcher:
    def __init__(self, lists: dict[int, CandidateList]):
        self.left_lists = {e: lst.entries for e, lst in lists.items()}
        right: dict[int, list[MatchSentence]] = {}
        for lst in lists.values():
            for s in lst.entries:
                right.setdefault(s.right, []).append(s)
        for entries in right.values():
            entries.sort(key=_right_key)
        self.right_lists = right
        self.matched: dict[int, int] = {}
        self.match_tv: dict[tuple[int, int], TruthValue] = {}
        self.on_stack: set[int] = set()
        self.depth_cap = len(self.left_lists) + len(self.right_lists) + 1

    def _list_of(self, e: int) -> list[MatchSentence]:
        return self.left_lists.get(e) or self.right_lists.get(e, [])

    def _finalize(self, sentence: MatchSentence) -> None:
        """Record the pair and delete every other offer either side made."""
        self.matched[sentence.left] = sentence.right
        self.matched[sentence.right] = sentence.left
        self.match_tv[(sentence.left, sentence.right)] = sentence.tv
        for e in (sentence.left, sentence.right):
            for other in self._list_of(e):
                if other is not sentence:
                    other.alive = False

    def _next_candidate(self, frame: _Frame) -> Optional[MatchSentence]:
        # re-read from the head every time: recursion below us mutates lists
        for s in self._list_of(frame.e):
            if s.alive and s.partner(frame.e) not in frame.tried:
                return s
        return None

    def run(self, root: int) -> None:
        if root in self.matched or root in self.on_stack:
            return
        stack = [_Frame(root, None)]
        self.on_stack.add(root)
        returned: object = _PENDING
        while stack:
            frame = stack[-1]
            if returned is not _PENDING:
                # a child call finished; if it claimed us we are done here
                if frame.e in self.matched:
                    stack.pop()
                    self.on_stack.discard(frame.e)
                    returned = self.matched[frame.e]
                    continue
                returned = _PENDING
            if len(stack) > self.depth_cap:
                # cannot happen while on_stack blocks re-entry; greedy fallback
                sentence = self._next_candidate(frame)
                if sentence is not None and sentence.partner(frame.e) not in self.matched:
                    self._finalize(sentence)
                stack.pop()
                self.on_stack.discard(frame.e)
                returned = self.matched.get(frame.e)
                continue
            sentence = self._next_candidate(frame)
            if sentence is None:
                # exhausted: unmatched for now; surviving offers stay usable
                stack.pop()
                self.on_stack.discard(frame.e)
                returned = None
                continue
            candidate = sentence.partner(frame.e)
            frame.tried.add(candidate)
            if candidate == frame.e_prev:
                self._finalize(sentence)
                stack.pop()
                self.on_stack.discard(frame.e)
                returned = candidate
                continue
            if candidate in self.matched:
                continue  # taken by someone better; keep walking
            if candidate in self.on_stack:
                continue  # busy higher up this walk; keep walking
            frame.awaiting = sentence
            self.on_stack.add(candidate)
            stack.append(_Frame(candidate, frame.e))
            returned = _PENDING


def rbmat(lists: dict[int, CandidateList]) -> MatchResult:
    """Stable 1-to-1 matching over the candidate lists, mutating them.

    Sources are processed in ascending id order; the result is deterministic
    for deterministic list contents.
    """
    matcher = _Matcher(lists)
    for e1 in sorted(lists):
        matcher.run(e1)
    pairs = []
    for e1 in sorted(lists):
        e2 = matcher.matched.get(e1)
        if e2 is not None:
            pairs.append((e1, e2, matcher.match_tv[(e1, e2)]))
    participants = set(matcher.left_lists) | set(matcher.right_lists)
    unmatched = {e for e in participants if e not in matcher.matched}
    return MatchResult(pairs, unmatched)


def snapshot_expectations(lists: dict[int, CandidateList]) -> dict[tuple[int, int], TruthValue]:
    """Pre-deletion view of all offered sentences, for the swap pass."""
    return {(s.left, s.right): s.tv for lst in lists.values() for s in lst.entries}


def swap_refine(
    result: MatchResult,
    snapshot: dict[tuple[int, int], TruthValue],
    max_swaps: Optional[int] = None,
) -> MatchResult:
    """Exchange partners of pair couples whenever the crossed sentences carry
    a strictly higher total expectation (absent sentences count as zero)."""

    def exp(e1: int, e2: int) -> float:
        tv = snapshot.get((e1, e2))
        return tv.f * tv.c if tv is not None else 0.0

    by_left: dict[int, list[tuple[float, int]]] = {}
    for (e1, e2), tv in snapshot.items():
        by_left.setdefault(e1, []).append((tv.f * tv.c, e2))
    for offers in by_left.values():
        offers.sort(key=lambda p: (-p[0], p[1]))

    match = {e1: e2 for e1, e2, _ in result.pairs}
    if max_swaps is None:
        max_swaps = max(len(match) ** 2, 1)
    rev = {e2: e1 for e1, e2 in match.items()}
    swaps = 0
    changed = True
    while changed and swaps < max_swaps:
        changed = False
        for e1a in sorted(match):
            e2a = match[e1a]
            # only partners that share a snapshot sentence with e1a can win
            for cross_a, e2b in by_left.get(e1a, ()):
                if e2b == e2a:
                    continue
                e1b = rev.get(e2b)
                if e1b is None or e1b == e1a:
                    continue
                straight = exp(e1a, e2a) + exp(e1b, e2b)
                crossed = cross_a + exp(e1b, e2a)
                if crossed > straight:
                    match[e1a], match[e1b] = e2b, e2a
                    rev[e2b], rev[e2a] = e1a, e1b
                    e2a = e2b
                    swaps += 1
                    changed = True
                    if swaps >= max_swaps:
                        break
            if swaps >= max_swaps:
                break
    zero = TruthValue(0.0, 0.0)
    pairs = [
        (e1, e2, snapshot.get((e1, e2), zero)) for e1, e2 in sorted(match.items())
    ]
    return MatchResult(pairs, set(result.unmatched))
