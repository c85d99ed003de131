"""Knowledge-graph storage: interned terms, reversed triples, indexes.

Both graphs of an alignment task share one `TermStore` so literals (and the
synthetic seed-label attribute) intern to a single id across graphs.  Every
loaded triple (x, r, y) is duplicated with its reverse (y, r^-1, x) at add
time; path search then only ever needs one traversal direction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Optional, Sequence

KG1 = 0
KG2 = 1

SEED_LABEL_ATTRIBUTE = "EA:label"


class KgFormatError(ValueError):
    """Malformed input file (message carries path and line number)."""


class TermKind(IntEnum):
    ENTITY = 0
    RELATION = 1
    ATTRIBUTE = 2
    LITERAL = 3


@dataclass(slots=True)
class Term:
    id: int
    name: str
    kind: TermKind
    kg: Optional[int]  # None for cross-graph terms (literals, shared attributes)
    reversed_of: Optional[int] = None


_LITERAL_RE = re.compile(r'^"(.*)"(@[A-Za-z][A-Za-z0-9-]*)?$', re.DOTALL)


def normalize_literal(text: str) -> str:
    """Trim whitespace and strip surrounding quotes / language tags only."""
    s = text.strip()
    m = _LITERAL_RE.match(s)
    if m:
        s = m.group(1)
    return s


class TermStore:
    """Dense, insertion-ordered interner shared by both graphs."""

    def __init__(self) -> None:
        self.terms: list[Term] = []
        self._index: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self.terms)

    def _new(self, name: str, kind: TermKind, kg: Optional[int]) -> Term:
        term = Term(len(self.terms), name, kind, kg)
        self.terms.append(term)
        return term

    def entity(self, kg: int, name: str) -> int:
        key = (TermKind.ENTITY, kg, name)
        tid = self._index.get(key)
        if tid is None:
            tid = self._new(name, TermKind.ENTITY, kg).id
            self._index[key] = tid
        return tid

    def find_entity(self, kg: int, name: str) -> Optional[int]:
        return self._index.get((TermKind.ENTITY, kg, name))

    def relation(self, kg: Optional[int], name: str, attribute: bool = False) -> int:
        """Intern a relation (or attribute) and its reversed twin; returns the forward id."""
        kind = TermKind.ATTRIBUTE if attribute else TermKind.RELATION
        key = (kind, kg, name)
        tid = self._index.get(key)
        if tid is None:
            fwd = self._new(name, kind, kg)
            rev = self._new(name + "^-1", kind, kg)
            fwd.reversed_of = rev.id
            rev.reversed_of = fwd.id
            self._index[key] = fwd.id
            tid = fwd.id
        return tid

    def literal(self, text: str) -> int:
        name = normalize_literal(text)
        key = (TermKind.LITERAL, None, name)
        tid = self._index.get(key)
        if tid is None:
            tid = self._new(name, TermKind.LITERAL, None).id
            self._index[key] = tid
        return tid

    def find_literal(self, text: str) -> Optional[int]:
        return self._index.get((TermKind.LITERAL, None, normalize_literal(text)))

    def get(self, tid: int) -> Term:
        return self.terms[tid]

    def name(self, tid: int) -> str:
        return self.terms[tid].name

    def reverse(self, tid: int) -> int:
        rev = self.terms[tid].reversed_of
        if rev is None:
            raise KeyError(f"term {tid} has no reverse")
        return rev

    def is_entity(self, tid: int) -> bool:
        return self.terms[tid].kind == TermKind.ENTITY

    def is_literal(self, tid: int) -> bool:
        return self.terms[tid].kind == TermKind.LITERAL


@dataclass(slots=True)
class RelationStats:
    rel: int
    functionality: float
    n_heads: int
    n_pairs: int


@dataclass(slots=True)
class KnowledgeGraph:
    store: TermStore
    kg_index: int
    triples: set[tuple[int, int, int]] = field(default_factory=set)
    entities: list[int] = field(default_factory=list)
    literals_used: set[int] = field(default_factory=set)
    frozen: bool = False
    _entity_set: set[int] = field(default_factory=set)
    _by_head: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    _by_tail: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    _rels_at: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    _rel_stats: dict[int, RelationStats] = field(default_factory=dict)

    # -- construction ------------------------------------------------------

    def _register_endpoint(self, tid: int) -> None:
        term = self.store.get(tid)
        if term.kind == TermKind.ENTITY:
            if tid not in self._entity_set:
                self._entity_set.add(tid)
                self.entities.append(tid)
        elif term.kind == TermKind.LITERAL:
            self.literals_used.add(tid)

    def add_triple(self, head: int, rel: int, tail: int) -> None:
        """Add (head, rel, tail) plus its reversed duplicate. Idempotent."""
        if self.frozen:
            raise RuntimeError("graph is frozen")
        self.triples.add((head, rel, tail))
        self.triples.add((tail, self.store.reverse(rel), head))
        self._register_endpoint(head)
        self._register_endpoint(tail)

    def freeze(self) -> None:
        """Build traversal indexes and per-relation functionality."""
        by_head: dict[int, list[tuple[int, int]]] = {}
        by_tail: dict[int, list[tuple[int, int]]] = {}
        rels_at: dict[tuple[int, int], list[int]] = {}
        heads: dict[int, set[int]] = {}
        pairs: dict[int, int] = {}
        for h, r, t in sorted(self.triples):
            by_head.setdefault(h, []).append((r, t))
            by_tail.setdefault(t, []).append((h, r))
            rels_at.setdefault((h, t), []).append(r)
            heads.setdefault(r, set()).add(h)
            pairs[r] = pairs.get(r, 0) + 1
        self._by_head = by_head
        self._by_tail = by_tail
        self._rels_at = rels_at
        self._rel_stats = {
            r: RelationStats(r, len(heads[r]) / pairs[r], len(heads[r]), pairs[r])
            for r in pairs
        }
        self.frozen = True

    def thaw(self) -> None:
        self.frozen = False

    # -- queries -----------------------------------------------------------

    def is_own_entity(self, tid: int) -> bool:
        return tid in self._entity_set

    def neighbors_out(self, e: int) -> Sequence[tuple[int, int]]:
        """(relation, tail) pairs for triples headed by ``e``."""
        return self._by_head.get(e, ())

    def neighbors_in(self, e: int) -> Sequence[tuple[int, int]]:
        """(head, relation) pairs for triples ending at ``e``."""
        return self._by_tail.get(e, ())

    def relations_between(self, head: int, tail: int) -> Sequence[int]:
        return self._rels_at.get((head, tail), ())

    def iter_triples(self) -> Iterator[tuple[int, int, int]]:
        yield from sorted(self.triples)

    def relation_stats(self, rel: int) -> RelationStats:
        stats = self._rel_stats.get(rel)
        if stats is None:
            raise KeyError(f"relation {self.store.name(rel)!r} has no triples in KG{self.kg_index + 1}")
        return stats

    def functionality(self, rel: int) -> float:
        return self.relation_stats(rel).functionality


# ---------------------------------------------------------------------------
# File loading.  All inputs are UTF-8 TSV, one record per line.


def _read_tsv(path: str, n_fields: int) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise KgFormatError(
                    f"{path}:{lineno}: expected {n_fields} tab-separated fields, got {len(fields)}"
                )
            yield lineno, fields


def load_kg(
    rel_triples_path: Optional[str],
    attr_triples_path: Optional[str],
    store: TermStore,
    kg_index: int,
    freeze: bool = True,
) -> KnowledgeGraph:
    """Load one graph's relation and attribute triple files.

    Duplicate lines collapse silently; each triple also gets its reversed
    twin.  Either path may be None (e.g. a graph without attribute triples).
    """
    kg = KnowledgeGraph(store, kg_index)
    if rel_triples_path:
        for _, (h, r, t) in _read_tsv(rel_triples_path, 3):
            kg.add_triple(
                store.entity(kg_index, h),
                store.relation(kg_index, r),
                store.entity(kg_index, t),
            )
    if attr_triples_path:
        for _, (e, a, v) in _read_tsv(attr_triples_path, 3):
            kg.add_triple(
                store.entity(kg_index, e),
                store.relation(kg_index, a, attribute=True),
                store.literal(v),
            )
    if freeze:
        kg.freeze()
    return kg


def load_links(
    path: str, store: TermStore, must_exist: bool = True, intern: bool = False
) -> list[tuple[int, int]]:
    """Read an `e1<TAB>e2` link file (seeds or ground truth) into term ids.

    ``intern=True`` registers entities absent from the loaded triples (they
    stay unmatchable but keep evaluation denominators honest); otherwise
    unknown entities either raise or are skipped per ``must_exist``.
    """
    out = []
    for lineno, (a, b) in _read_tsv(path, 2):
        if intern:
            e1: Optional[int] = store.entity(KG1, a)
            e2: Optional[int] = store.entity(KG2, b)
        else:
            e1 = store.find_entity(KG1, a)
            e2 = store.find_entity(KG2, b)
            if e1 is None or e2 is None:
                if must_exist:
                    missing = a if e1 is None else b
                    raise KgFormatError(f"{path}:{lineno}: unknown entity {missing!r}")
                continue
        out.append((e1, e2))
    return out


def load_entity_set(path: str, store: TermStore, kg_index: int) -> set[int]:
    """Read a one-URI-per-line range file; URIs absent from the graph are ignored."""
    ids: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            name = line.strip()
            if not name:
                continue
            tid = store.find_entity(kg_index, name)
            if tid is not None:
                ids.add(tid)
    return ids


def inject_seed_label_triples(
    kg1: KnowledgeGraph, kg2: KnowledgeGraph, seeds: Iterable[tuple[int, int]]
) -> int:
    """Give both sides of every seed pair an identical synthetic label literal.

    The shared `EA:label` attribute is near-perfectly functional as long as
    label strings are distinct, so these triples anchor the seeds in the same
    evidence machinery as ordinary attribute triples.  Functionality is
    recomputed afterwards (graphs are re-frozen if they were frozen).
    """
    store = kg1.store
    seeds = list(seeds)
    for e1, e2 in seeds:
        for tid, kg in ((e1, kg1), (e2, kg2)):
            term = store.get(tid) if 0 <= tid < len(store) else None
            if term is None or term.kind != TermKind.ENTITY or term.kg != kg.kg_index:
                raise KeyError(f"seed pair ({e1}, {e2}) references an unknown entity")
    refreeze = []
    for kg in (kg1, kg2):
        if kg.frozen:
            kg.thaw()
            refreeze.append(kg)
    label_attr = store.relation(None, SEED_LABEL_ATTRIBUTE, attribute=True)
    added = 0
    for e1, e2 in seeds:
        lit = store.literal(store.name(e1))
        kg1.add_triple(e1, label_attr, lit)
        kg2.add_triple(e2, label_attr, lit)
        added += 2
    for kg in refreeze:
        kg.freeze()
    return added
