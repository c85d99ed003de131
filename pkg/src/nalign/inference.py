"""Similarity inference: evidence paths between the two graphs.

Three path families feed the per-iteration candidate similarities:

* bridge paths  (type 1) - a triple in each graph joined by an already
  known head pair supports the tail pair, weighted by how functional the
  relations are; conclusions merge by probabilistic revision.
* name paths    (type 2) - embedding cosine of names/descriptions as a
  direct evidence sentence; fused into the aggregate by plain revision.
* relation paths (type 3) - aligned endpoint pairs vote on whether a
  relation of one graph implies a relation of the other; positive and
  absent facts contribute opposite evidence via induction.

Every emitted conclusion can be traced: a `PathEvidence` records the premise
truth values, and `replay_path` re-derives the conclusion from nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .kg import KG1, KG2, KnowledgeGraph, TermStore
from .sideinfo import NAME_CHANNELS, NameEvidenceConfig, SideInfo
from .truth import (
    TruthValue,
    analogy,
    conditional_deduction,
    deduction,
    evidence_from_truth,
    induction,
    probabilistic_revision_fold,
    revision,
    truth_from_evidence,
    Evidence,
)

FACT = TruthValue(1.0, 1.0)

# The implication defining what a functional relation licenses.  Treated as
# definitional knowledge, hence the axiomatic truth value.
FUNCTIONAL_DEF_STMT = "((*,#a,$b)->#r & (*,#a,$c)->#r & #r->[fun]) => $b <-> $c"
FUNCTIONAL_DEF_TRUTH = FACT


@dataclass(frozen=True, slots=True)
class PathEvidence:
    """Premises (with truth values) of one path instance plus its conclusion."""

    path_type: int  # 1, 2 or 3
    premises: tuple[tuple[str, TruthValue], ...]
    conclusion: TruthValue


@dataclass(frozen=True, slots=True)
class SimilaritySentence:
    left: int
    right: int
    tv: TruthValue
    provenance: tuple[PathEvidence, ...] = ()

    @property
    def expectation(self) -> float:
        return self.tv.expectation


def bridge_truth(tv_rel_inh: TruthValue, tv_pair_sim: TruthValue, fun_degree: float) -> TruthValue:
    """Run the five-step rule chain of a bridge path.

    Deduction carries the relation correspondence onto the first triple,
    analogy substitutes the known pair into the second, and three conditional
    deductions discharge the functionality definition, the substituted
    triple, and the functionality degree itself.
    """
    t3 = deduction(FACT, tv_rel_inh)
    t6 = analogy(FACT, tv_pair_sim)
    t8 = conditional_deduction(FUNCTIONAL_DEF_TRUTH, t3)
    t9 = conditional_deduction(t8, t6)
    return conditional_deduction(t9, TruthValue(fun_degree, 1.0))


def replay_path(ev: PathEvidence) -> TruthValue:
    """Re-derive a path's conclusion from its recorded premises alone."""
    tvs = [tv for _, tv in ev.premises]
    if ev.path_type == 1:
        # premises: triple1, rel inheritance, triple2, pair similarity,
        # functionality definition, functionality degree
        t3 = deduction(tvs[0], tvs[1])
        t6 = analogy(tvs[2], tvs[3])
        t8 = conditional_deduction(tvs[4], t3)
        t9 = conditional_deduction(t8, t6)
        return conditional_deduction(t9, tvs[5])
    if ev.path_type == 2:
        return tvs[0]
    if ev.path_type == 3:
        # premises: triple, head pair, tail pair, candidate fact
        t14 = analogy(tvs[0], tvs[1])
        t16 = analogy(t14, tvs[2])
        return induction(tvs[3], t16)
    raise ValueError(f"unknown path type {ev.path_type}")


def aggregate_candidate(
    type1_conclusions: Sequence[TruthValue],
    type2_sentences: Sequence[TruthValue],
) -> Optional[TruthValue]:
    """Merge bridge conclusions by probabilistic revision, then fuse each name
    sentence by plain revision.  Returns None when there is no evidence."""
    tv: Optional[TruthValue] = None
    if type1_conclusions:
        tv = probabilistic_revision_fold(type1_conclusions)
    for sent in type2_sentences:
        tv = sent if tv is None else revision(tv, sent)
    return tv


@dataclass(slots=True)
class InferenceParams:
    iota: float = 0.5       # default relation-correspondence confidence
    theta: float = 0.1      # minimum f and c of a consumable pair similarity
    c_absent: float = 0.5   # confidence of an absent-fact denial
    default_inheritance_iterations: int = 2


class AlignmentSnapshot:
    """Immutable per-iteration inputs: pairs from seeds/previous matching
    (theta-filtered) and the previous iteration's relation correspondences."""

    def __init__(
        self,
        iteration: int,
        entity_pairs: Sequence[tuple[int, int, TruthValue]],
        relation_inheritance: Optional[dict[tuple[int, int], TruthValue]] = None,
        theta: float = 0.1,
    ):
        self.iteration = iteration
        self.theta = theta
        self.relation_inheritance = dict(relation_inheritance or {})
        self.partners_1to2: dict[int, dict[int, TruthValue]] = {}
        self.partners_2to1: dict[int, dict[int, TruthValue]] = {}
        for e1, e2, tv in entity_pairs:
            if tv.f < theta or tv.c < theta:
                continue
            self.partners_1to2.setdefault(e1, {})[e2] = tv
            self.partners_2to1.setdefault(e2, {})[e1] = tv

    def pair_count(self) -> int:
        return sum(len(d) for d in self.partners_1to2.values())


class InferenceEngine:
    """Evaluates the path families against frozen graphs and side info.

    The engine itself holds no per-entity mutable state, so distinct source
    entities can be processed by parallel workers after `set_snapshot`.
    """

    def __init__(
        self,
        kg1: KnowledgeGraph,
        kg2: KnowledgeGraph,
        store: TermStore,
        side: SideInfo,
        params: InferenceParams,
        name_conf: Optional[NameEvidenceConfig] = None,
    ):
        self.kg1 = kg1
        self.kg2 = kg2
        self.store = store
        self.side = side
        self.params = params
        self.name_conf = name_conf or NameEvidenceConfig()
        self.snapshot: Optional[AlignmentSnapshot] = None
        self._lit_cache: tuple[dict, dict] = ({}, {})
        self._dense: Optional[dict] = None

    # -- iteration state -----------------------------------------------------

    def set_snapshot(self, snapshot: AlignmentSnapshot) -> None:
        self.snapshot = snapshot

    def _use_default_inheritance(self) -> bool:
        assert self.snapshot is not None
        return self.snapshot.iteration < self.params.default_inheritance_iterations

    # -- premise (5): partner lookup ------------------------------------------

    def _literal_partners(self, lit: int, direction: int) -> dict[int, TruthValue]:
        cache = self._lit_cache[direction]
        got = cache.get(lit)
        if got is None:
            target = self.kg2 if direction == 0 else self.kg1
            theta = self.params.theta
            got = {}
            if lit in target.literals_used:
                got[lit] = FACT
            for other, s in self.side.value_index.get(lit, ()):
                if other != lit and other in target.literals_used and s >= theta:
                    got.setdefault(other, TruthValue(s, s))
            cache[lit] = got
        return got

    def _partners_of(self, term: int, direction: int) -> dict[int, TruthValue]:
        if self.store.is_literal(term):
            return self._literal_partners(term, direction)
        assert self.snapshot is not None
        table = self.snapshot.partners_1to2 if direction == 0 else self.snapshot.partners_2to1
        return table.get(term, _EMPTY)

    # -- bridge paths (type 1) -------------------------------------------------

    def _bridge_legs(self, y1: int) -> Iterator[tuple[int, int, int, int, int, TruthValue]]:
        """Yield (x1, r1, x2, r2, y2, pair_tv) for every instance ending at y1."""
        kg2 = self.kg2
        store = self.store
        for x1, r1 in self.kg1.neighbors_in(y1):
            partners = self._partners_of(x1, 0)
            if not partners:
                continue
            for x2, pair_tv in partners.items():
                for r2, y2 in kg2.neighbors_out(x2):
                    if store.is_entity(y2) and kg2.is_own_entity(y2):
                        yield x1, r1, x2, r2, y2, pair_tv

    def _inheritance(self, r_from: int, r_to: int, default: Optional[TruthValue]) -> Optional[TruthValue]:
        assert self.snapshot is not None
        tv = self.snapshot.relation_inheritance.get((r_from, r_to))
        return tv if tv is not None else default

    def bridge_accumulate(self, y1: int) -> dict[int, list[float]]:
        """Probabilistic-revision accumulators per candidate: [prod(1-f), w]."""
        default = TruthValue(1.0, self.params.iota) if self._use_default_inheritance() else None
        acc: dict[int, list[float]] = {}
        fun1 = self.kg1.functionality
        fun2 = self.kg2.functionality
        for x1, r1, x2, r2, y2, tv5 in self._bridge_legs(y1):
            f5, c5 = tv5.f, tv5.c
            c6 = f5 * c5
            slot = None
            for inh, fun in (
                (self._inheritance(r1, r2, default), fun2(r2)),
                (self._inheritance(r2, r1, default), fun1(r1)),
            ):
                if inh is None:
                    continue
                # float-identical to the bridge_truth rule chain
                fi, ci = inh.f, inh.c
                c8 = fi * (fi * ci)
                f9 = fi * f5
                c9 = (f9 * c8) * c6
                f11 = f9 * fun
                c11 = (f9 * fun) * c9
                if slot is None:
                    slot = acc.setdefault(y2, [1.0, 0.0])
                slot[0] *= 1.0 - f11
                slot[1] += c11 / (1.0 - c11)
        return acc

    def bridge_conclusions(self, y1: int) -> dict[int, list[tuple[TruthValue, PathEvidence]]]:
        """Full per-path conclusions with replayable evidence (slow form)."""
        default = TruthValue(1.0, self.params.iota) if self._use_default_inheritance() else None
        name = self.store.name
        out: dict[int, list[tuple[TruthValue, PathEvidence]]] = {}
        for x1, r1, x2, r2, y2, tv5 in self._bridge_legs(y1):
            stmt1 = f"(*,{name(x1)},{name(y1)}) -> {name(r1)}"
            stmt2 = f"(*,{name(x2)},{name(y2)}) -> {name(r2)}"
            pair_stmt = f"{name(x1)} <-> {name(x2)}"
            for r_from, r_to, fun_rel, kg in ((r1, r2, r2, self.kg2), (r2, r1, r1, self.kg1)):
                inh = self._inheritance(r_from, r_to, default)
                if inh is None:
                    continue
                fun = kg.functionality(fun_rel)
                tv = bridge_truth(inh, tv5, fun)
                evd = PathEvidence(
                    1,
                    (
                        (stmt1 if r_from == r1 else stmt2, FACT),
                        (f"{name(r_from)} -> {name(r_to)}", inh),
                        (stmt2 if r_from == r1 else stmt1, FACT),
                        (pair_stmt, tv5),
                        (FUNCTIONAL_DEF_STMT, FUNCTIONAL_DEF_TRUTH),
                        (f"{name(fun_rel)} -> [fun]", TruthValue(fun, 1.0)),
                    ),
                    tv,
                )
                out.setdefault(y2, []).append((tv, evd))
        return out

    # -- name paths (type 2) -----------------------------------------------

    def _channel_confidences(self) -> list[tuple[str, float]]:
        out = []
        for ch in NAME_CHANNELS:
            c = self.name_conf.confidence.get(ch, 0.0)
            if c > 0.0 and self.side.table(KG1, ch) is not None and self.side.table(KG2, ch) is not None:
                out.append((ch, c))
        return out

    def name_sentences(self, y1: int) -> list[SimilaritySentence]:
        """One evidence sentence per channel per embedded candidate."""
        out: list[SimilaritySentence] = []
        for ch, conf in self._channel_confidences():
            t1 = self.side.table(KG1, ch)
            t2 = self.side.table(KG2, ch)
            v1 = t1.vector(y1)
            if v1 is None:
                continue
            sims = t2.matrix @ v1
            for row, y2 in enumerate(t2.ids):
                s = float(sims[row])
                if s <= 0.0:
                    continue
                tv = TruthValue(min(s, 1.0), conf)
                stmt = f"{self.store.name(y1)} <-> {self.store.name(int(y2))} [{ch}]"
                out.append(
                    SimilaritySentence(
                        y1, int(y2), tv,
                        (PathEvidence(2, ((stmt, tv),), tv),),
                    )
                )
        return out

    # -- dense aggregation (pipeline hot path) --------------------------------

    def _dense_ctx(self) -> dict:
        """Union of embedded candidate ids with per-channel scatter indexes."""
        if self._dense is None:
            chans = self._channel_confidences()
            members: set[int] = set()
            for ch, conf in chans:
                t2 = self.side.table(KG2, ch)
                members.update(
                    int(tid) for tid in t2.ids if self.kg2.is_own_entity(int(tid))
                )
            union = sorted(members)
            pos = {tid: i for i, tid in enumerate(union)}
            per_channel = []
            for ch, conf in chans:
                t2 = self.side.table(KG2, ch)
                keep = [i for i, tid in enumerate(t2.ids) if int(tid) in pos]
                idx = np.array([pos[int(t2.ids[i])] for i in keep], dtype=np.int64)
                w_ch = conf / (1.0 - conf)
                per_channel.append((ch, w_ch, np.asarray(keep, dtype=np.int64), idx))
            self._dense = {
                "ids": np.asarray(union, dtype=np.int64),
                "pos": pos,
                "channels": per_channel,
            }
        return self._dense

    def candidate_rows(self, y1: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Aggregate truth values for every candidate of ``y1``.

        Returns (ids, f, c) with candidates in ascending id order.  Matches
        `aggregate_candidate` up to floating-point reassociation.
        """
        ctx = self._dense_ctx()
        n = len(ctx["ids"])
        w_plus = np.zeros(n)
        w = np.zeros(n)
        for ch, w_ch, keep, idx in ctx["channels"]:
            t1 = self.side.table(KG1, ch)
            v1 = t1.vector(y1)
            if v1 is None:
                continue
            sims = (self.side.table(KG2, ch).matrix[keep] @ v1)
            positive = sims > 0.0
            np.clip(sims, 0.0, 1.0, out=sims)
            w_plus[idx[positive]] += w_ch * sims[positive]
            w[idx[positive]] += w_ch
        extras: list[tuple[int, float, float]] = []
        pos = ctx["pos"]
        for y2, (prod_not_f, wb) in self.bridge_accumulate(y1).items():
            fb = 1.0 - prod_not_f
            i = pos.get(y2)
            if i is None:
                extras.append((y2, fb * wb, wb))
            else:
                w_plus[i] += fb * wb
                w[i] += wb
        present = w > 0.0
        ids = ctx["ids"][present]
        f = w_plus[present] / w[present]
        c = w[present] / (w[present] + 1.0)
        if extras:
            extras.sort()
            e_ids = np.array([e[0] for e in extras], dtype=np.int64)
            e_w = np.array([e[2] for e in extras])
            e_f = np.array([e[1] for e in extras]) / e_w
            ids = np.concatenate([ids, e_ids])
            f = np.concatenate([f, e_f])
            c = np.concatenate([c, e_w / (e_w + 1.0)])
            order = np.argsort(ids, kind="stable")
            ids, f, c = ids[order], f[order], c[order]
        return ids, f, c

    def name_paths_for(self, y1: int, y2: int) -> list[PathEvidence]:
        """Per-channel name evidence for one specific pair."""
        out = []
        for ch, conf in self._channel_confidences():
            v1 = self.side.table(KG1, ch).vector(y1)
            v2 = self.side.table(KG2, ch).vector(y2)
            if v1 is None or v2 is None:
                continue
            s = float(v1 @ v2)
            if s <= 0.0:
                continue
            tv = TruthValue(min(s, 1.0), conf)
            stmt = f"{self.store.name(y1)} <-> {self.store.name(y2)} [{ch}]"
            out.append(PathEvidence(2, ((stmt, tv),), tv))
        return out

    # -- evidence traces for the log ------------------------------------------

    def paths_for_pair(self, y1: int, y2: int) -> list[PathEvidence]:
        """All bridge and name paths behind a specific candidate pair."""
        paths = [evd for tv, evd in self.bridge_conclusions(y1).get(y2, ())]
        paths.extend(self.name_paths_for(y1, y2))
        return paths

    def aggregate_pair(self, y1: int, y2: int) -> Optional[SimilaritySentence]:
        """Aggregate one pair the slow way, carrying full provenance."""
        bridge = self.bridge_conclusions(y1).get(y2, [])
        names = self.name_paths_for(y1, y2)
        tv = aggregate_candidate([tv for tv, _ in bridge], [p.conclusion for p in names])
        if tv is None:
            return None
        prov = tuple(evd for _, evd in bridge) + tuple(names)
        return SimilaritySentence(y1, y2, tv, prov)

    # -- relation paths (type 3) -----------------------------------------------

    def infer_relation_inheritance(self) -> dict[tuple[int, int], TruthValue]:
        """Evidence-weighted correspondence for every relation pair that has at
        least one positive instance; both directions are produced."""
        out: dict[tuple[int, int], TruthValue] = {}
        c_absent = self.params.c_absent
        for direction in (0, 1):
            src = self.kg1 if direction == 0 else self.kg2
            dst = self.kg2 if direction == 0 else self.kg1
            total: dict[int, float] = {}
            positive: dict[tuple[int, int], float] = {}
            for h, r, t in src.iter_triples():
                head_partners = self._partners_of(h, direction)
                if not head_partners:
                    continue
                tail_partners = self._partners_of(t, direction)
                if not tail_partners:
                    continue
                for x2, tv13 in head_partners.items():
                    c14 = tv13.f * tv13.c
                    f14 = tv13.f
                    for y2, tv15 in tail_partners.items():
                        f16 = f14 * tv15.f
                        c16 = (tv15.f * c14) * tv15.c
                        g = f16 * c16
                        if g <= 0.0:
                            continue
                        total[r] = total.get(r, 0.0) + g
                        for r2 in dst.relations_between(x2, y2):
                            key = (r, r2)
                            positive[key] = positive.get(key, 0.0) + g
            for r1, r2 in sorted(positive):
                w_plus = positive[(r1, r2)]
                w_minus = c_absent * max(total[r1] - w_plus, 0.0)
                tv = truth_from_evidence(Evidence(w_plus, w_plus + w_minus))
                # a shared relation id can be reached from both directions;
                # the first (KG1-side) pass wins
                out.setdefault((r1, r2), tv)
        return out


_EMPTY: dict[int, TruthValue] = {}
