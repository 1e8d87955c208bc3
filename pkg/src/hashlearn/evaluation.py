"""Hamming-space retrieval metrics over packed binary codes.

Packing convention: codes are stored one per row as uint8 bytes; bit j of
code i is set iff the sign matrix entry (j, i) is +1, bits filling each byte
least-significant first.  Code i occupies ceil(L / 8) bytes and padding bits
beyond L are zero.
"""

from dataclasses import dataclass, field

import numpy as np

POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint16)


def _bytes_per_code(code_len):
    return (code_len + 7) // 8


@dataclass
class BinaryCodes:
    """A set of fixed-length binary codes in packed row-major form."""

    code_len: int
    count: int
    packed: np.ndarray  # (count, bytes_per_code) uint8

    @classmethod
    def from_sign_matrix(cls, b):
        b = np.asarray(b)
        if b.ndim != 2:
            raise ValueError("expected an (L, m) sign matrix, got ndim=%d" % b.ndim)
        if not np.all(np.abs(b) == 1):
            raise ValueError("sign matrix entries must be +1/-1")
        bits = (b.T > 0).astype(np.uint8)
        packed = np.packbits(bits, axis=1, bitorder="little")
        return cls(int(b.shape[0]), int(b.shape[1]), packed)

    def to_sign_matrix(self):
        if self.count == 0:
            return np.zeros((self.code_len, 0))
        bits = np.unpackbits(self.packed, axis=1, count=self.code_len, bitorder="little")
        return (bits.T.astype(np.float64) * 2.0 - 1.0)

    def validate(self):
        if self.code_len < 1:
            raise ValueError("code_len must be >= 1")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        want = (self.count, _bytes_per_code(self.code_len))
        if self.packed.dtype != np.uint8 or self.packed.shape != want:
            raise ValueError("packed array must be uint8 with shape %s, got %s %s"
                             % (want, self.packed.dtype, self.packed.shape))
        pad_bits = self.code_len % 8
        if pad_bits and self.count:
            mask = (0xFF << pad_bits) & 0xFF
            if np.any(self.packed[:, -1] & mask):
                raise ValueError("padding bits beyond the code length must be zero")


def hamming_distance(a, b, code_len):
    """Differing bits among the first code_len bits of two packed codes."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if code_len < 1:
        raise ValueError("code_len must be >= 1")
    want = (_bytes_per_code(code_len),)
    if a.shape != want or b.shape != want:
        raise ValueError("packed codes must be 1-d of %d bytes for %d bits" % (want[0], code_len))
    x = np.bitwise_xor(a, b)
    pad_bits = code_len % 8
    if pad_bits:
        x[-1] &= (1 << pad_bits) - 1
    return int(POPCOUNT[x].sum())


def _distances_to_all(query_row, db):
    """Hamming distances from one packed query to every database code."""
    return POPCOUNT[np.bitwise_xor(db.packed, query_row[None, :])].sum(axis=1)


def euclidean_knn_gt(database, queries, k):
    """k nearest database columns per query column under squared Euclidean distance.

    Ties resolve toward the lower database index.  Returns a list of index
    arrays, one per query.
    """
    database = np.asarray(database, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    if database.ndim != 2 or queries.ndim != 2 or database.shape[0] != queries.shape[0]:
        raise ValueError("database and queries must be (D, *) arrays with equal D")
    if not 1 <= k <= database.shape[1]:
        raise ValueError("k=%d out of range for %d database items" % (k, database.shape[1]))
    out = []
    for j in range(queries.shape[1]):
        d = np.sum((database - queries[:, j][:, None]) ** 2, axis=0)
        out.append(np.argsort(d, kind="stable")[:k].astype(np.int64))
    return out


def label_gt(db_labels, query_labels):
    """Relevant set per query: every database item sharing the query's label."""
    db_labels = np.asarray(db_labels)
    query_labels = np.asarray(query_labels)
    if db_labels.ndim != 1 or query_labels.ndim != 1:
        raise ValueError("labels must be 1-d arrays")
    return [np.flatnonzero(db_labels == q).astype(np.int64) for q in query_labels]


def validate_ground_truth(gt, db_size, n_queries):
    if len(gt) != n_queries:
        raise ValueError("ground truth covers %d queries, expected %d" % (len(gt), n_queries))
    for qi, idx in enumerate(gt):
        idx = np.asarray(idx)
        if idx.size and (idx.min() < 0 or idx.max() >= db_size):
            raise ValueError("ground truth for query %d has indices outside [0, %d)" % (qi, db_size))
        if np.unique(idx).size != idx.size:
            raise ValueError("ground truth for query %d has duplicate indices" % qi)


@dataclass
class EvalReport:
    mean_ap: float
    precision_at: dict = field(default_factory=dict)       # radius -> mean precision
    per_query_ap: list = field(default_factory=list)
    per_query_precision: dict = field(default_factory=dict)
    top_k: int | None = None
    radii: list = field(default_factory=list)


def _ranking(query_row, db, top_k):
    d = _distances_to_all(query_row, db)
    order = np.argsort(d, kind="stable")  # ties resolve toward the lower index
    if top_k is not None:
        order = order[:top_k]
    return d, order


def mean_average_precision(db_codes, query_codes, gt, top_k=None):
    """Mean of per-query average precision over a Hamming-distance ranking.

    The ranked list may be capped at top_k items; relevant items beyond the
    cap still count in the AP denominator.  Queries with empty ground truth
    contribute an AP of 0.  Returns (mean_ap, per_query_ap).
    """
    db_codes.validate()
    query_codes.validate()
    if db_codes.code_len != query_codes.code_len:
        raise ValueError("database and query codes have different lengths")
    if top_k is not None and top_k < 1:
        raise ValueError("top_k must be >= 1 when given")
    validate_ground_truth(gt, db_codes.count, query_codes.count)
    aps = []
    for qi in range(query_codes.count):
        _, order = _ranking(query_codes.packed[qi], db_codes, top_k)
        gt_q = np.asarray(gt[qi])
        if gt_q.size == 0:
            aps.append(0.0)
            continue
        rel = np.zeros(db_codes.count, dtype=bool)
        rel[gt_q] = True
        rel_at_rank = rel[order]
        hits = np.cumsum(rel_at_rank)
        ranks = np.flatnonzero(rel_at_rank) + 1
        aps.append(float(np.sum(hits[rel_at_rank] / ranks)) / gt_q.size)
    mean_ap = float(np.mean(aps)) if aps else 0.0
    return mean_ap, aps


def precision_at_radius(db_codes, query_codes, gt, radius):
    """Mean precision of the Hamming ball of the given radius around each query.

    A query retrieving nothing at this radius scores 0.  Returns
    (mean_precision, per_query_precision).
    """
    db_codes.validate()
    query_codes.validate()
    if db_codes.code_len != query_codes.code_len:
        raise ValueError("database and query codes have different lengths")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    validate_ground_truth(gt, db_codes.count, query_codes.count)
    precisions = []
    for qi in range(query_codes.count):
        d = _distances_to_all(query_codes.packed[qi], db_codes)
        within = d <= radius
        n_retrieved = int(within.sum())
        if n_retrieved == 0:
            precisions.append(0.0)
            continue
        rel = np.zeros(db_codes.count, dtype=bool)
        rel[np.asarray(gt[qi], dtype=np.int64)] = True
        precisions.append(float(np.sum(within & rel)) / n_retrieved)
    mean_p = float(np.mean(precisions)) if precisions else 0.0
    return mean_p, precisions


def evaluate(db_codes, query_codes, gt, radii=(2, 3, 4), top_k=None):
    """Full report: mAP plus precision at each requested Hamming radius."""
    mean_ap, per_ap = mean_average_precision(db_codes, query_codes, gt, top_k)
    report = EvalReport(mean_ap, per_query_ap=per_ap, top_k=top_k, radii=sorted(set(int(r) for r in radii)))
    for r in report.radii:
        mean_p, per_p = precision_at_radius(db_codes, query_codes, gt, r)
        report.precision_at[r] = mean_p
        report.per_query_precision[r] = per_p
    return report
