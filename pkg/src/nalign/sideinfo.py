"""Embedding-derived side information: name channels and value similarities.

Vectors are produced offline (see the sidecar package) and handed over as
text files; everything here is read-only after load, so any number of
workers can query concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .kg import KG1, KG2
from .truth import TruthValue

CHANNEL_NAME = "name"
CHANNEL_TRANSLATED = "name_translated"
CHANNEL_DESCRIPTION = "description"
CHANNEL_VALUE = "value"
NAME_CHANNELS = (CHANNEL_NAME, CHANNEL_TRANSLATED, CHANNEL_DESCRIPTION)
CHANNELS = NAME_CHANNELS + (CHANNEL_VALUE,)


class EmbeddingFormatError(ValueError):
    pass


class EmbeddingTable:
    """Unit-normalized vectors for one channel of one graph."""

    def __init__(self, channel: str, dim: int, ids: list[int], matrix: np.ndarray):
        if matrix.shape != (len(ids), dim):
            raise EmbeddingFormatError("matrix shape does not match ids/dim")
        self.channel = channel
        self.dim = dim
        self.ids = np.asarray(ids, dtype=np.int64)
        self.matrix = matrix
        self._row_of = {tid: i for i, tid in enumerate(ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def has(self, tid: int) -> bool:
        return tid in self._row_of

    def vector(self, tid: int) -> Optional[np.ndarray]:
        row = self._row_of.get(tid)
        return None if row is None else self.matrix[row]


def load_embeddings(path: str, channel: str, resolve: Callable[[str], Optional[int]]) -> EmbeddingTable:
    """Parse `#dim=N` header plus `id<TAB>floats` lines; normalizes rows.

    ``resolve`` maps the id string to a term id; unresolvable ids, dimension
    mismatches and non-finite values abort with the offending line number.
    """
    ids: list[int] = []
    rows: list[np.ndarray] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#dim="):
            raise EmbeddingFormatError(f"{path}:1: missing '#dim=<N>' header")
        try:
            dim = int(header[5:])
        except ValueError:
            raise EmbeddingFormatError(f"{path}:1: bad dimension {header!r}") from None
        if dim <= 0:
            raise EmbeddingFormatError(f"{path}:1: dimension must be positive")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                id_str, vec_str = line.split("\t", 1)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: expected id<TAB>floats") from None
            tid = resolve(id_str)
            if tid is None:
                raise EmbeddingFormatError(f"{path}:{lineno}: unknown id {id_str!r}")
            try:
                vec = np.array(vec_str.split(), dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: unparsable component") from None
            if vec.shape != (dim,):
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} components, got {vec.shape[0]}"
                )
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}:{lineno}: non-finite value")
            norm = float(np.linalg.norm(vec))
            if norm < 1e-12:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-normalizable zero vector")
            ids.append(tid)
            rows.append(vec / norm)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingTable(channel, dim, ids, matrix)


@dataclass(slots=True)
class NameEvidenceConfig:
    """Per-channel confidence of name-style evidence sentences."""

    confidence: dict[str, float] = field(default_factory=dict)
    penalty_applied: bool = False

    def __post_init__(self) -> None:
        for ch, c in self.confidence.items():
            if not 0.0 <= c < 1.0:
                raise ValueError(f"channel {ch!r} confidence {c!r} outside [0, 1)")


class SideInfo:
    """All embedding tables plus the cross-graph value-similarity index."""

    def __init__(self) -> None:
        self.tables: dict[tuple[int, str], EmbeddingTable] = {}
        self.value_index: dict[int, list[tuple[int, float]]] = {}

    def add_table(self, kg_index: int, table: EmbeddingTable) -> None:
        self.tables[(kg_index, table.channel)] = table

    def table(self, kg_index: int, channel: str) -> Optional[EmbeddingTable]:
        return self.tables.get((kg_index, channel))

    def name_channels_loaded(self) -> list[str]:
        return [ch for ch in NAME_CHANNELS
                if (KG1, ch) in self.tables and (KG2, ch) in self.tables]

    def name_similarity(self, y1: int, y2: int, channel: str) -> Optional[float]:
        """Cosine of the two stored vectors, or None when either is absent."""
        t1, t2 = self.table(KG1, channel), self.table(KG2, channel)
        if t1 is None or t2 is None:
            return None
        v1, v2 = t1.vector(y1), t2.vector(y2)
        if v1 is None or v2 is None:
            return None
        return float(v1 @ v2)

    # -- literal values ------------------------------------------------------

    def build_value_index(self, used1: set[int], used2: set[int], k_value: int,
                          batch: int = 2048) -> None:
        """Exact top-k cosine partners between the two graphs' embedded literals.

        Identical literals share a term id across graphs and are excluded; so
        are non-positive cosines.  Brute force over all pairs, batched.
        """
        t1, t2 = self.table(KG1, CHANNEL_VALUE), self.table(KG2, CHANNEL_VALUE)
        index: dict[int, list[tuple[int, float]]] = {}
        if t1 is None or t2 is None or k_value <= 0:
            self.value_index = index
            return
        for src, dst, src_used, dst_used in ((t1, t2, used1, used2), (t2, t1, used2, used1)):
            src_rows = [i for i, tid in enumerate(src.ids) if int(tid) in src_used]
            dst_rows = [i for i, tid in enumerate(dst.ids) if int(tid) in dst_used]
            if not src_rows or not dst_rows:
                continue
            src_ids = src.ids[src_rows]
            dst_ids = dst.ids[dst_rows]
            dst_mat = dst.matrix[dst_rows]
            for lo in range(0, len(src_rows), batch):
                hi = min(lo + batch, len(src_rows))
                sims = src.matrix[src_rows[lo:hi]] @ dst_mat.T
                # identical strings intern to one id: never index them
                same = src_ids[lo:hi, None] == dst_ids[None, :]
                sims[same] = -np.inf
                k = min(k_value, sims.shape[1])
                top = np.argpartition(-sims, k - 1, axis=1)[:, :k]
                for row_off, cols in enumerate(top):
                    tid = int(src_ids[lo + row_off])
                    pairs = [(int(dst_ids[c]), float(sims[row_off, c])) for c in cols]
                    pairs = [(other, s) for other, s in pairs if s > 0.0]
                    pairs.sort(key=lambda p: (-p[1], p[0]))
                    if pairs:
                        entry = index.setdefault(tid, [])
                        entry.extend(p for p in pairs if p not in entry)
        for tid, entry in index.items():
            entry.sort(key=lambda p: (-p[1], p[0]))
            del entry[max(k_value, 1):]
        self.value_index = index

    def literal_similarity(self, x1: int, x2: int) -> Optional[TruthValue]:
        """<1,1> for the same interned literal, <s,s> for an indexed partner."""
        if x1 == x2:
            return TruthValue(1.0, 1.0)
        for other, s in self.value_index.get(x1, ()):
            if other == x2:
                return TruthValue(s, s)
        return None
