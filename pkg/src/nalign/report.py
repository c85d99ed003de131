"""Run artifacts: alignment TSVs, evidence logs, text reports and figures."""

from __future__ import annotations

import json
import os
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .inference import PathEvidence, aggregate_candidate, replay_path
from .truth import TruthValue


def format_float(v: float) -> str:
    return f"{v:.12g}"


def write_alignment_tsv(path: str, rows: Sequence[tuple[str, str, TruthValue]]) -> None:
    """`e1<TAB>e2<TAB>f<TAB>c<TAB>expectation`, one matched pair per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for e1, e2, tv in rows:
            fh.write(
                f"{e1}\t{e2}\t{format_float(tv.f)}\t{format_float(tv.c)}"
                f"\t{format_float(tv.expectation)}\n"
            )


def path_record(ev: PathEvidence) -> dict:
    return {
        "type": ev.path_type,
        "premises": [{"stmt": stmt, "f": tv.f, "c": tv.c} for stmt, tv in ev.premises],
        "conclusion": {"f": ev.conclusion.f, "c": ev.conclusion.c},
    }


def alignment_record(e1_name: str, e2_name: str, tv: TruthValue,
                     paths: Sequence[PathEvidence]) -> dict:
    return {
        "statement": f"{e1_name} <-> {e2_name}",
        "f": tv.f,
        "c": tv.c,
        "expectation": tv.expectation,
        "paths": [path_record(p) for p in paths],
    }


def write_evidence_log(path: str, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def replay_alignment(record: dict, tol: float = 1e-9) -> tuple[bool, str]:
    """Re-derive every logged path and the statement truth value.

    Returns (ok, message).  Path conclusions and the statement's <f, c> must
    reproduce within ``tol`` from the logged premises alone.
    """
    bridge: list[TruthValue] = []
    names: list[TruthValue] = []
    for i, p in enumerate(record.get("paths", [])):
        ev = PathEvidence(
            p["type"],
            tuple((pr["stmt"], TruthValue(pr["f"], pr["c"])) for pr in p["premises"]),
            TruthValue(p["conclusion"]["f"], p["conclusion"]["c"]),
        )
        got = replay_path(ev)
        if abs(got.f - ev.conclusion.f) > tol or abs(got.c - ev.conclusion.c) > tol:
            return False, f"path {i}: replayed {got} != logged {ev.conclusion}"
        if ev.path_type == 2:
            names.append(got)
        else:
            bridge.append(got)
    agg = aggregate_candidate(bridge, names)
    if agg is None:
        agg = TruthValue(0.0, 0.0)
    if abs(agg.f - record["f"]) > tol or abs(agg.c - record["c"]) > tol:
        return False, (
            f"statement {record.get('statement')!r}: replayed {agg} "
            f"!= logged <{record['f']}, {record['c']}>"
        )
    return True, "ok"


def write_iteration_report(path: str, lines: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def render_figures(out_dir: str, history: Sequence[dict],
                   expectations: Optional[Sequence[float]] = None) -> list[str]:
    """Metric curves per iteration plus the final expectation histogram."""
    written = []
    if history:
        fig, ax1 = plt.subplots(figsize=(7, 4.2))
        iters = [h["iteration"] for h in history]
        ax1.plot(iters, [h["hits_at_1"] for h in history], "o-", color="tab:blue",
                 label="Hits@1")
        ax1.set_xlabel("iteration")
        ax1.set_ylabel("Hits@1", color="tab:blue")
        ax1.set_ylim(0, 1.05)
        ax2 = ax1.twinx()
        ax2.plot(iters, [h["matched"] for h in history], "s--", color="tab:orange",
                 label="matched pairs")
        ax2.set_ylabel("matched pairs", color="tab:orange")
        fig.tight_layout()
        p = os.path.join(out_dir, "metrics.png")
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(p)
    if expectations:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(list(expectations), bins=40, range=(0.0, 1.0), color="tab:green")
        ax.set_xlabel("expectation of matched pair")
        ax.set_ylabel("count")
        fig.tight_layout()
        p = os.path.join(out_dir, "expectation_hist.png")
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(p)
    return written
