"""Shared builders: in-memory toy graphs and synthetic twin-graph datasets."""

from __future__ import annotations

import random

from nalign.kg import KG1, KG2, KnowledgeGraph, TermStore


def build_graph(store: TermStore, kg_index: int, rel_triples=(), attr_triples=(), freeze=True):
    """Assemble a graph from (head, rel, tail) / (entity, attr, literal) name tuples."""
    kg = KnowledgeGraph(store, kg_index)
    for h, r, t in rel_triples:
        kg.add_triple(
            store.entity(kg_index, h),
            store.relation(kg_index, r),
            store.entity(kg_index, t),
        )
    for e, a, v in attr_triples:
        kg.add_triple(
            store.entity(kg_index, e),
            store.relation(kg_index, a, attribute=True),
            store.literal(v),
        )
    if freeze:
        kg.freeze()
    return kg


def synth_twin_dataset(
    n_entities=60,
    n_relations=4,
    avg_degree=3,
    unique_literal_share=1.0,
    n_shared_literals=5,
    seed=0,
):
    """A random sparse graph and its exact structural copy.

    Entities are `a:e<i>` / `b:e<i>`, relations are renamed between the two
    sides (`r<k>` vs `s<k>`) so relation correspondence has to be inferred.
    A `unique_literal_share` fraction of entities carries a distinctive
    literal, identical on both sides; a few common literals add noise.
    Returns (rel1, attr1, rel2, attr2, links) as name-tuple lists.
    """
    rng = random.Random(seed)
    ents = [f"e{i}" for i in range(n_entities)]
    rel1, rel2 = [], []
    seen = set()
    n_edges = n_entities * avg_degree // 2
    while len(seen) < n_edges:
        h, t = rng.sample(range(n_entities), 2)
        r = rng.randrange(n_relations)
        if (h, r, t) in seen:
            continue
        seen.add((h, r, t))
        rel1.append((f"a:{ents[h]}", f"r{r}", f"a:{ents[t]}"))
        rel2.append((f"b:{ents[h]}", f"s{r}", f"b:{ents[t]}"))
    attr1, attr2 = [], []
    for i, e in enumerate(ents):
        if rng.random() < unique_literal_share:
            attr1.append((f"a:{e}", "p0", f"anchor-{i}"))
            attr2.append((f"b:{e}", "q0", f"anchor-{i}"))
        attr1.append((f"a:{e}", "p1", f"common-{i % n_shared_literals}"))
        attr2.append((f"b:{e}", "q1", f"common-{i % n_shared_literals}"))
    links = [(f"a:{e}", f"b:{e}") for e in ents]
    return rel1, attr1, rel2, attr2, links


def perturbed_twin_dataset(n_entities=150, seed=0, drop=0.2, anchor_share=0.7):
    """A twin where the second side lost a fraction of edges and gained noise.

    Exercises iteration dynamics on graphs that are related but not
    isomorphic, which is the realistic shape of cross-source graphs.
    """
    rng = random.Random(seed)
    ents = [f"e{i}" for i in range(n_entities)]
    rel1, rel2 = [], []
    seen = set()
    while len(seen) < n_entities * 3:
        h, t = rng.sample(range(n_entities), 2)
        r = rng.randrange(6)
        if (h, r, t) in seen:
            continue
        seen.add((h, r, t))
        rel1.append((f"a:{ents[h]}", f"r{r}", f"a:{ents[t]}"))
        if rng.random() > drop:
            rel2.append((f"b:{ents[h]}", f"s{r}", f"b:{ents[t]}"))
    for _ in range(n_entities // 2):
        h, t = rng.sample(range(n_entities), 2)
        rel2.append((f"b:{ents[h]}", f"s{rng.randrange(6)}", f"b:{ents[t]}"))
    attr1, attr2 = [], []
    for i, e in enumerate(ents):
        if rng.random() < anchor_share:
            attr1.append((f"a:{e}", "p0", f"anchor-{i}"))
            attr2.append((f"b:{e}", "q0", f"anchor-{i}"))
        attr1.append((f"a:{e}", "p1", f"group-{i % 6}"))
        attr2.append((f"b:{e}", "q1", f"group-{i % 6}"))
    links = [(f"a:{e}", f"b:{e}") for e in ents]
    return rel1, attr1, rel2, attr2, links


def build_twin_pair(store: TermStore, dataset):
    rel1, attr1, rel2, attr2, links = dataset
    kg1 = build_graph(store, KG1, rel1, attr1, freeze=False)
    kg2 = build_graph(store, KG2, rel2, attr2, freeze=False)
    pairs = [(store.entity(KG1, a), store.entity(KG2, b)) for a, b in links]
    return kg1, kg2, pairs


def write_dataset(tmp_path, dataset, prefix=""):
    """Materialize a synthetic dataset as the TSV files the loader expects."""
    rel1, attr1, rel2, attr2, links = dataset
    paths = {}
    for name, rows in (
        ("rel1", rel1), ("attr1", attr1), ("rel2", rel2), ("attr2", attr2),
    ):
        p = tmp_path / f"{prefix}{name}.tsv"
        p.write_text("".join("\t".join(row) + "\n" for row in rows), encoding="utf-8")
        paths[name] = str(p)
    p = tmp_path / f"{prefix}links.tsv"
    p.write_text("".join(f"{a}\t{b}\n" for a, b in links), encoding="utf-8")
    paths["links"] = str(p)
    return paths
