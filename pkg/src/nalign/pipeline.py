"""End-to-end alignment runs: load, iterate, match, save, evaluate.

The per-iteration flow mirrors the engine contract: freeze a snapshot of
previous results, fan entity inference out to workers, filter and rank the
candidates, match 1-to-1, refine by swapping, persist artifacts.  Relation
correspondences inferred this iteration feed the next one.
"""

from __future__ import annotations

import math
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import report
from .config import ConfigError, RunConfig
from .inference import AlignmentSnapshot, InferenceEngine, InferenceParams
from .kg import (
    KG1,
    KG2,
    TermStore,
    inject_seed_label_triples,
    load_entity_set,
    load_kg,
    load_links,
)
from .matching import CandidateList, MatchResult, MatchSentence, rbmat, snapshot_expectations, swap_refine
from .sideinfo import (
    CHANNEL_DESCRIPTION,
    CHANNEL_NAME,
    CHANNEL_TRANSLATED,
    CHANNEL_VALUE,
    NameEvidenceConfig,
    SideInfo,
    load_embeddings,
)
from .truth import TruthValue

SEED_CONFIDENCE = 1.0 - 1e-6
CALIBRATION_ITERATIONS = 5
DEFAULT_NAME_CONFIDENCE = 0.5


class PipelineError(RuntimeError):
    pass


@dataclass
class EvaluationReport:
    hits_at_1: float
    precision: float
    recall: float
    f1: float
    matched: int
    runtime_seconds: float = 0.0
    iterations: list = field(default_factory=list)


def evaluate(
    pred_pairs: Iterable[tuple[int, int]],
    truth_pairs: Iterable[tuple[int, int]],
    mode: str = "all",
    seeds: Iterable[tuple[int, int]] = (),
) -> EvaluationReport:
    """Hits@1 (= recall), precision and F1 of a 1-to-1 prediction.

    In "test" mode seed links are excluded from both the ground truth and,
    by left entity, from the prediction.
    """
    seeds = set(seeds)
    pred = list(pred_pairs)
    truth = list(truth_pairs)
    if mode == "test":
        seed_lefts = {a for a, _ in seeds}
        truth = [p for p in truth if p not in seeds]
        pred = [p for p in pred if p[0] not in seed_lefts]
    truth_set = set(truth)
    correct = sum(1 for p in pred if p in truth_set)
    hits = correct / len(truth) if truth else 0.0
    precision = correct / len(pred) if pred else 0.0
    f1 = (2 * precision * hits / (precision + hits)) if (precision + hits) > 0 else 0.0
    return EvaluationReport(hits, precision, hits, f1, len(pred))


def halve_evidence(confidence: float) -> float:
    """Confidence carrying half the evidence amount of the input."""
    w = confidence / (1.0 - confidence) / 2.0
    return w / (w + 1.0)


def split_name_confidence(
    total_confidence: float, channels: Sequence[str], c_penalty: float, finetuned: bool
) -> NameEvidenceConfig:
    """Divide the total name-evidence amount equally over the channels,
    penalized when the encoder was not finetuned."""
    w = total_confidence / (1.0 - total_confidence)
    if channels:
        w /= len(channels)
    if not finetuned:
        w /= c_penalty
    per = w / (w + 1.0)
    return NameEvidenceConfig({ch: per for ch in channels}, penalty_applied=not finetuned)


# ---------------------------------------------------------------------------
# Worker-side entity processing.  Globals are inherited through fork.

_WORK: dict = {}


def _entity_row(y1: int):
    engine: InferenceEngine = _WORK["engine"]
    k_sim: int = _WORK["k_sim"]
    ranges = _WORK["ranges"]
    ids, f, c = engine.candidate_rows(y1)
    if ids.size and ranges is not None:
        a1, a2_arr = ranges
        inside = np.isin(ids, a2_arr)
        keep = inside == (y1 in a1)
        ids, f, c = ids[keep], f[keep], c[keep]
    if not ids.size:
        return y1, ids, f, c
    order = np.lexsort((ids, -(f * c)))[:k_sim]
    return y1, ids[order], f[order], c[order]


def _row_chunk(span):
    lo, hi = span
    entities = _WORK["entities"]
    return [_entity_row(e) for e in entities[lo:hi]]


class Pipeline:
    """One configured alignment task against a pair of triple stores."""

    def __init__(self, config: RunConfig):
        config.validate()
        self.cfg = config
        self.store: Optional[TermStore] = None
        self.kg1 = None
        self.kg2 = None
        self.side: Optional[SideInfo] = None
        self.truth: list[tuple[int, int]] = []
        self.seeds: list[tuple[int, int]] = []
        self.ranges = None
        self.final_result: Optional[MatchResult] = None
        self.calibrated_c_name: Optional[float] = None
        self._prepared = False

    # -- loading -------------------------------------------------------------

    def prepare(self) -> None:
        if self._prepared:
            return
        cfg = self.cfg
        for key in ("kg1_rel", "kg2_rel", "truth", "seeds", "range1", "range2"):
            path = getattr(cfg, key)
            if path is not None and not os.path.exists(path):
                raise PipelineError(f"input file for {key} not found: {path}")
        store = TermStore()
        attr1 = cfg.kg1_attr if cfg.use_attr else None
        attr2 = cfg.kg2_attr if cfg.use_attr else None
        kg1 = load_kg(cfg.kg1_rel, attr1, store, KG1, freeze=False)
        kg2 = load_kg(cfg.kg2_rel, attr2, store, KG2, freeze=False)
        self.truth = load_links(cfg.truth, store, intern=True) if cfg.truth else []
        if cfg.seeds:
            self.seeds = load_links(cfg.seeds, store, intern=True)
        elif cfg.seed_ratio > 0 and self.truth:
            n = int(len(self.truth) * cfg.seed_ratio + 1e-9)
            self.seeds = self.truth[:n]
        if self.seeds:
            inject_seed_label_triples(kg1, kg2, self.seeds)
        kg1.freeze()
        kg2.freeze()

        side = SideInfo()
        for channel, p1, p2 in (
            (CHANNEL_NAME, cfg.emb_name_1, cfg.emb_name_2),
            (CHANNEL_TRANSLATED, cfg.emb_translated_1, cfg.emb_translated_2),
            (CHANNEL_DESCRIPTION, cfg.emb_description_1, cfg.emb_description_2),
        ):
            if channel not in cfg.enabled_name_channels():
                continue
            side.add_table(KG1, load_embeddings(p1, channel, lambda s: store.find_entity(KG1, s)))
            side.add_table(KG2, load_embeddings(p2, channel, lambda s: store.find_entity(KG2, s)))
        if cfg.use_value:
            side.add_table(KG1, load_embeddings(cfg.emb_value_1, CHANNEL_VALUE, store.find_literal))
            side.add_table(KG2, load_embeddings(cfg.emb_value_2, CHANNEL_VALUE, store.find_literal))
            side.build_value_index(kg1.literals_used, kg2.literals_used, cfg.k_value)

        if cfg.use_range and cfg.range1 and cfg.range2:
            a1 = load_entity_set(cfg.range1, store, KG1)
            a2 = load_entity_set(cfg.range2, store, KG2)
            self.ranges = (a1, np.array(sorted(a2), dtype=np.int64))

        self.store, self.kg1, self.kg2, self.side = store, kg1, kg2, side
        self._prepared = True

    # -- calibration -----------------------------------------------------------

    def _name_config(self, total_confidence: float) -> NameEvidenceConfig:
        return split_name_confidence(
            total_confidence,
            self.cfg.enabled_name_channels(),
            self.cfg.c_penalty,
            self.cfg.name_finetuned,
        )

    def calibrate_name_confidence(self) -> float:
        """Probe run with the default unit evidence, then halve the evidence
        behind the output's mean confidence."""
        probe_dir = os.path.join(self.cfg.out_dir, "calibration")
        result, _ = self._execute(
            end_iteration=CALIBRATION_ITERATIONS - 1,
            name_conf=self._name_config(DEFAULT_NAME_CONFIDENCE),
            out_dir=probe_dir,
            write_artifacts=False,
        )
        if not result.pairs:
            return DEFAULT_NAME_CONFIDENCE
        mean_c = sum(tv.c for _, _, tv in result.pairs) / len(result.pairs)
        return halve_evidence(mean_c)

    # -- main entry ------------------------------------------------------------

    def run(self) -> EvaluationReport:
        started = time.perf_counter()
        self.prepare()
        name_conf = NameEvidenceConfig()
        if self.cfg.enabled_name_channels():
            total = self.cfg.c_name
            if total is None:
                total = self.calibrate_name_confidence()
            self.calibrated_c_name = total
            name_conf = self._name_config(total)
        result, history = self._execute(
            end_iteration=self.cfg.end_iteration,
            name_conf=name_conf,
            out_dir=self.cfg.out_dir,
            write_artifacts=True,
        )
        self.final_result = result
        rep = self._score(result)
        rep.runtime_seconds = time.perf_counter() - started
        rep.iterations = history
        self._write_summary(rep, result)
        return rep

    # -- execution ---------------------------------------------------------------

    def _score(self, result: MatchResult) -> EvaluationReport:
        pred = [(e1, e2) for e1, e2, _ in result.pairs]
        return evaluate(pred, self.truth, self.cfg.eval_mode, self.seeds)

    def _engine(self, name_conf: NameEvidenceConfig) -> InferenceEngine:
        params = InferenceParams(
            iota=self.cfg.iota, theta=self.cfg.theta, c_absent=self.cfg.c_absent
        )
        return InferenceEngine(self.kg1, self.kg2, self.store, self.side, params, name_conf)

    def _snapshot_pairs(self, prev: Optional[MatchResult]):
        pairs = []
        if prev is not None:
            pairs.extend(prev.pairs)
        seed_tv = TruthValue(1.0, SEED_CONFIDENCE)
        pairs.extend((e1, e2, seed_tv) for e1, e2 in self.seeds)
        return pairs

    def _compute_rows(self, engine: InferenceEngine):
        entities = self.kg1.entities
        _WORK.clear()
        _WORK.update(
            engine=engine,
            k_sim=self.cfg.k_sim,
            ranges=self.ranges,
            entities=entities,
        )
        if self.cfg.workers <= 1 or len(entities) < 64:
            return [_entity_row(e) for e in entities]
        n_chunks = self.cfg.workers * 4
        size = max(1, math.ceil(len(entities) / n_chunks))
        spans = [(lo, min(lo + size, len(entities))) for lo in range(0, len(entities), size)]
        ctx = mp.get_context("fork")
        with ctx.Pool(self.cfg.workers) as pool:
            chunks = pool.map(_row_chunk, spans)
        return [row for chunk in chunks for row in chunk]

    def _build_lists(self, rows) -> dict[int, CandidateList]:
        lists = {}
        for y1, ids, f, c in rows:
            lst = CandidateList(y1, self.cfg.k_sim)
            lst.entries = [
                MatchSentence(y1, int(y2), TruthValue(float(fv), float(cv)))
                for y2, fv, cv in zip(ids, f, c)
            ]
            lists[y1] = lst
        return lists

    def _execute(self, end_iteration: int, name_conf: NameEvidenceConfig,
                 out_dir: str, write_artifacts: bool):
        os.makedirs(out_dir, exist_ok=True)
        engine = self._engine(name_conf)
        prev: Optional[MatchResult] = None
        inheritance: dict = {}
        history = []
        for iteration in range(end_iteration + 1):
            tick = time.perf_counter()
            snapshot = AlignmentSnapshot(
                iteration, self._snapshot_pairs(prev), inheritance, self.cfg.theta
            )
            engine.set_snapshot(snapshot)
            rows = self._compute_rows(engine)
            lists = self._build_lists(rows)
            snap_tvs = snapshot_expectations(lists)
            result = rbmat(lists)
            if self.cfg.use_swapping:
                result = swap_refine(result, snap_tvs)
            inheritance = engine.infer_relation_inheritance()
            seconds = time.perf_counter() - tick
            scored = self._score(result)
            history.append(
                {
                    "iteration": iteration,
                    "matched": len(result.pairs),
                    "hits_at_1": scored.hits_at_1,
                    "precision": scored.precision,
                    "f1": scored.f1,
                    "snapshot_pairs": snapshot.pair_count(),
                    "inheritance_entries": len(inheritance),
                    "seconds": round(seconds, 3),
                }
            )
            if write_artifacts:
                self._write_iteration(out_dir, iteration, engine, result, history[-1])
            prev = result
        return prev if prev is not None else MatchResult([], set()), history

    # -- artifacts ---------------------------------------------------------------

    def _named_pairs(self, result: MatchResult):
        name = self.store.name
        return [(name(e1), name(e2), tv) for e1, e2, tv in result.pairs]

    def _write_iteration(self, out_dir, iteration, engine, result, stats) -> None:
        tag = f"iter{iteration:02d}"
        report.write_alignment_tsv(
            os.path.join(out_dir, f"alignment_{tag}.tsv"), self._named_pairs(result)
        )
        if self.cfg.write_evidence:
            records = []
            name = self.store.name
            for e1, e2, tv in result.pairs:
                sentence = engine.aggregate_pair(e1, e2)
                if sentence is None:
                    records.append(report.alignment_record(name(e1), name(e2),
                                                           TruthValue(0, 0), []))
                else:
                    records.append(
                        report.alignment_record(
                            name(e1), name(e2), sentence.tv, sentence.provenance
                        )
                    )
            report.write_evidence_log(
                os.path.join(out_dir, f"evidence_{tag}.jsonl"), records
            )
        lines = [f"{key}: {value}" for key, value in stats.items()]
        report.write_iteration_report(os.path.join(out_dir, f"report_{tag}.txt"), lines)

    def _write_summary(self, rep: EvaluationReport, result: MatchResult) -> None:
        out_dir = self.cfg.out_dir
        report.write_alignment_tsv(
            os.path.join(out_dir, "alignment_final.tsv"), self._named_pairs(result)
        )
        lines = [
            f"matched: {rep.matched}",
            f"hits@1: {rep.hits_at_1:.6f}",
            f"precision: {rep.precision:.6f}",
            f"recall: {rep.recall:.6f}",
            f"f1: {rep.f1:.6f}",
            f"runtime_seconds: {rep.runtime_seconds:.3f}",
        ]
        if self.calibrated_c_name is not None:
            lines.append(f"c_name_total: {self.calibrated_c_name:.6f}")
        for h in rep.iterations:
            lines.append(
                "iter {iteration:>3}: matched={matched} hits@1={hits_at_1:.4f} "
                "snapshot={snapshot_pairs} inh={inheritance_entries} "
                "t={seconds}s".format(**h)
            )
        report.write_iteration_report(os.path.join(out_dir, "run_report.txt"), lines)
        if self.cfg.write_figures:
            report.render_figures(
                out_dir, rep.iterations, [tv.expectation for _, _, tv in result.pairs]
            )


def run(config: RunConfig) -> EvaluationReport:
    return Pipeline(config).run()


def filter_by_expectation(result: MatchResult, threshold: float):
    return [(e1, e2, tv) for e1, e2, tv in result.pairs if tv.expectation >= threshold]


def bootstrap_unsupervised(config: RunConfig) -> EvaluationReport:
    """Seedless two-step loop: structure-only run, emit high-expectation pairs
    for encoder finetuning, then a second run with the produced embeddings."""
    if config.seed_ratio != 0 or config.seeds:
        raise ConfigError("bootstrap runs are seedless: set seed_ratio = 0 and no seeds file")
    step1_cfg = replace(
        config,
        use_name=False,
        use_translated=False,
        use_description=False,
        use_value=False,
        out_dir=os.path.join(config.out_dir, "step1"),
    )
    pipeline1 = Pipeline(step1_cfg)
    rep1 = pipeline1.run()
    emitted = emit_bootstrap_pairs(pipeline1, config.theta_filter,
                                   os.path.join(config.out_dir, "bootstrap_pairs_step1.tsv"))
    wanted = [
        p
        for flag, paths in (
            (config.use_name, (config.emb_name_1, config.emb_name_2)),
            (config.use_translated, (config.emb_translated_1, config.emb_translated_2)),
            (config.use_description, (config.emb_description_1, config.emb_description_2)),
            (config.use_value, (config.emb_value_1, config.emb_value_2)),
        )
        if flag
        for p in paths
    ]
    if not wanted:
        return rep1
    if not all(p and os.path.exists(p) for p in wanted):
        missing = [p for p in wanted if not p or not os.path.exists(p)]
        raise PipelineError(
            "sidecar artifacts not found: finetune on "
            f"{emitted} and export embeddings first (missing: {missing})"
        )
    step2_cfg = replace(config, out_dir=os.path.join(config.out_dir, "step2"))
    pipeline2 = Pipeline(step2_cfg)
    rep2 = pipeline2.run()
    emit_bootstrap_pairs(pipeline2, config.theta_filter,
                         os.path.join(config.out_dir, "bootstrap_pairs_step2.tsv"))
    rep2.iterations = rep1.iterations + rep2.iterations
    return rep2


def emit_bootstrap_pairs(pipeline: Pipeline, threshold: float, path: str) -> str:
    result = pipeline.final_result
    filtered = filter_by_expectation(result, threshold) if result else []
    if not filtered:
        raise PipelineError(
            f"no matched pair reached expectation {threshold}; nothing to finetune on"
        )
    name = pipeline.store.name
    with open(path, "w", encoding="utf-8") as fh:
        for e1, e2, _ in filtered:
            fh.write(f"{name(e1)}\t{name(e2)}\n")
    return path
