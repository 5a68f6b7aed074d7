"""Dataset ingestion: TU benchmark directories, edge lists, rating CSVs.

File formats (documented here; the loaders are the reference parsers):

* Edge list: one "u v" pair per line, separated by whitespace or commas.
  Indices may be 0- or 1-based; the base is auto-detected from the minimum
  index.  Duplicate and reversed-duplicate edges merge; self-loops drop.
* TU benchmark directory: DS_A.txt (global edge list), DS_graph_indicator.txt
  (node -> graph id), DS_graph_labels.txt, optional DS_node_labels.txt /
  DS_node_attributes.txt.  Indices are normalized from the format's 1-based
  convention to 0-based.
* Ratings: CSV rows "user,item,rating" plus a social edge list over users.
  The split is either an explicit test CSV or a seeded fraction.

Loaders are deterministic and order-stable for a fixed input.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..graph import Graph

logger = logging.getLogger(__name__)

DEGREE_FEATURE_CAP = 64


@dataclass(frozen=True)
class DatasetBundle:
    """A named list of graphs with optional per-graph integer labels."""

    name: str
    graphs: tuple[Graph, ...]
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != len(self.graphs):
            raise ValueError("label count != graph count")

    def __len__(self) -> int:
        return len(self.graphs)


@dataclass(frozen=True)
class RatingData:
    """User-item ratings over a social graph among users.

    train/test are (m, 3) float arrays of (user, item, rating) triples with
    integer-valued index columns; train and test never overlap.
    """

    n_users: int
    n_items: int
    train: np.ndarray
    test: np.ndarray
    social: Graph
    rating_range: tuple[float, float] = (1.0, 5.0)

    def __post_init__(self):
        for name, arr in (("train", self.train), ("test", self.test)):
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValueError(f"{name} must be (m, 3) triples")
            if arr.size:
                users, items = arr[:, 0], arr[:, 1]
                if users.min() < 0 or users.max() >= self.n_users:
                    raise ValueError(f"{name} references an unknown user")
                if items.min() < 0 or items.max() >= self.n_items:
                    raise ValueError(f"{name} references an unknown item")
        train_keys = {(int(u), int(i)) for u, i, _ in self.train}
        test_keys = {(int(u), int(i)) for u, i, _ in self.test}
        if train_keys & test_keys:
            raise ValueError("train and test splits overlap")
        if self.social.n != self.n_users:
            raise ValueError("social graph must have one node per user")

    def matrix(self, which: str = "train") -> tuple[np.ndarray, np.ndarray]:
        """Dense rating matrix and its observation mask for one split."""
        entries = self.train if which == "train" else self.test
        ratings = np.zeros((self.n_users, self.n_items))
        mask = np.zeros_like(ratings)
        for u, i, r in entries:
            ratings[int(u), int(i)] = r
            mask[int(u), int(i)] = 1.0
        return ratings, mask


def _parse_pairs(lines: Sequence[str], path: str) -> list[tuple[int, int, int]]:
    """(u, v, line_number) triples from 'u v' or 'u, v' lines."""
    pairs = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-integer endpoint in {raw!r}") from exc
        pairs.append((u, v, lineno))
    return pairs


def read_edge_list(path, n: Optional[int] = None) -> Graph:
    """Parse an edge-list file into a Graph.

    The index base (0 or 1) is auto-detected from the minimum index seen.
    """
    path = Path(path)
    pairs = _parse_pairs(path.read_text().splitlines(), str(path))
    if not pairs:
        return Graph.from_edges(n or 0, [])
    base = min(min(u, v) for u, v, _ in pairs)
    if base not in (0, 1):
        base = 0
    edges = [(u - base, v - base) for u, v, _ in pairs]
    count = n if n is not None else max(max(u, v) for u, v in edges) + 1
    return Graph.from_edges(count, edges)


def _read_column(path: Path) -> list[str]:
    return [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]


def degree_one_hot(g: Graph, cap: int = DEGREE_FEATURE_CAP) -> np.ndarray:
    """Degree one-hot features; degrees >= cap land in the overflow bucket."""
    deg = np.minimum(g.degrees().astype(int), cap)
    feats = np.zeros((g.n, cap + 1))
    feats[np.arange(g.n), deg] = 1.0
    return feats


def load_tu_dataset(directory, degree_cap: int = DEGREE_FEATURE_CAP) -> DatasetBundle:
    """Load a TU-format benchmark directory.

    Node labels become one-hot features; failing those, node attributes are
    used as-is; failing both, degree one-hots (capped, overflow bucketed).
    """
    directory = Path(directory)
    name = directory.name
    prefix = None
    for candidate in sorted(directory.glob("*_A.txt")):
        prefix = candidate.name[: -len("_A.txt")]
        break
    if prefix is None:
        raise ValueError(f"{directory}: no *_A.txt edge file found")

    adj_path = directory / f"{prefix}_A.txt"
    ind_path = directory / f"{prefix}_graph_indicator.txt"
    lab_path = directory / f"{prefix}_graph_labels.txt"
    for required in (adj_path, ind_path, lab_path):
        if not required.exists():
            raise ValueError(f"missing required file {required}")

    indicator = np.array([int(x) for x in _read_column(ind_path)])
    n_total = len(indicator)
    indicator -= indicator.min()  # normalize the 1-based convention
    n_graphs = int(indicator.max()) + 1 if n_total else 0

    raw_labels = [int(float(x)) for x in _read_column(lab_path)]
    if len(raw_labels) != n_graphs:
        raise ValueError(
            f"{lab_path}: {len(raw_labels)} labels for {n_graphs} graphs"
        )
    classes = sorted(set(raw_labels))
    labels = np.array([classes.index(c) for c in raw_labels])

    pairs = _parse_pairs(adj_path.read_text().splitlines(), str(adj_path))
    base = min((min(u, v) for u, v, _ in pairs), default=1)
    if base not in (0, 1):
        base = 0

    node_of_graph = [np.flatnonzero(indicator == gi) for gi in range(n_graphs)]
    first_node = np.array([nodes[0] if len(nodes) else 0 for nodes in node_of_graph])
    per_graph_edges: list[list[tuple[int, int]]] = [[] for _ in range(n_graphs)]
    for u, v, lineno in pairs:
        u -= base
        v -= base
        if not (0 <= u < n_total and 0 <= v < n_total):
            raise ValueError(f"{adj_path}:{lineno}: node index out of range")
        gu, gv = indicator[u], indicator[v]
        if gu != gv:
            raise ValueError(
                f"{adj_path}:{lineno}: edge joins graphs {gu + 1} and {gv + 1}"
            )
        off = first_node[gu]
        per_graph_edges[gu].append((u - off, v - off))

    node_labels = None
    nl_path = directory / f"{prefix}_node_labels.txt"
    if nl_path.exists():
        column = _read_column(nl_path)
        if len(column) == n_total:
            node_labels = np.array([int(float(x)) for x in column])
        else:
            warnings.warn(
                f"{nl_path}: {len(column)} node labels for {n_total} nodes; "
                "falling back to degree features"
            )

    node_attrs = None
    if node_labels is None:
        na_path = directory / f"{prefix}_node_attributes.txt"
        if na_path.exists():
            rows = [
                [float(x) for x in ln.replace(",", " ").split()]
                for ln in _read_column(na_path)
            ]
            if len(rows) == n_total:
                node_attrs = np.array(rows)

    label_values = sorted(set(node_labels.tolist())) if node_labels is not None else []

    graphs = []
    for gi in range(n_graphs):
        nodes = node_of_graph[gi]
        g = Graph.from_edges(len(nodes), per_graph_edges[gi])
        if node_labels is not None:
            feats = np.zeros((len(nodes), len(label_values)))
            for local, global_idx in enumerate(nodes):
                feats[local, label_values.index(int(node_labels[global_idx]))] = 1.0
            g = g.with_features(feats)
        elif node_attrs is not None:
            g = g.with_features(node_attrs[nodes])
        else:
            g = g.with_features(degree_one_hot(g, cap=degree_cap))
        graphs.append(g)
    if node_labels is None and node_attrs is None:
        logger.info("%s: no node labels; using degree one-hot features", name)
    return DatasetBundle(name=name, graphs=tuple(graphs), labels=labels)


def write_tu_dataset(bundle: DatasetBundle, directory, prefix: Optional[str] = None) -> None:
    """Write a bundle back out in TU layout (edges, indicator, labels)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    prefix = prefix or bundle.name
    edges, indicator = [], []
    offset = 0
    for gi, g in enumerate(bundle.graphs, start=1):
        indicator.extend([gi] * g.n)
        coo = g.adj.tocoo()
        for u, v in zip(coo.row, coo.col):
            edges.append(f"{u + 1 + offset}, {v + 1 + offset}")
        offset += g.n
    (directory / f"{prefix}_A.txt").write_text("\n".join(edges) + "\n")
    (directory / f"{prefix}_graph_indicator.txt").write_text(
        "\n".join(map(str, indicator)) + "\n"
    )
    labels = bundle.labels if bundle.labels is not None else np.zeros(len(bundle), dtype=int)
    (directory / f"{prefix}_graph_labels.txt").write_text(
        "\n".join(str(int(x)) for x in labels) + "\n"
    )


def _parse_rating_rows(path: Path, rating_range) -> list[tuple[int, int, float]]:
    lo, hi = rating_range
    rows = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if lineno == 1 and text.lower().replace(" ", "") in ("user,item,rating",):
            continue
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'user,item,rating', got {raw!r}")
        try:
            user, item, rating = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row {raw!r}") from exc
        if not (lo <= rating <= hi):
            raise ValueError(
                f"{path}:{lineno}: rating {rating} outside declared range [{lo}, {hi}]"
            )
        rows.append((user, item, rating))
    return rows


def _dedupe_last_wins(rows, label: str):
    seen: dict[tuple[int, int], float] = {}
    dupes = 0
    for user, item, rating in rows:
        if (user, item) in seen:
            dupes += 1
        seen[(user, item)] = rating
    if dupes:
        warnings.warn(f"{label}: {dupes} duplicate (user, item) pairs; keeping the last")
    return seen


def load_ratings(
    ratings_path,
    social_path,
    test_fraction: Optional[float] = None,
    test_path=None,
    seed: int = 0,
    rating_range: tuple[float, float] = (1.0, 5.0),
) -> RatingData:
    """Load ratings plus the social graph, with a deterministic split.

    Exactly one of test_fraction (seeded random split) or test_path
    (explicit test CSV) selects the test entries.  User and item ids are
    densified in sorted order; social edges touching unknown users are
    dropped, which leaves those users as isolated nodes only if they rated
    something.
    """
    if (test_fraction is None) == (test_path is None):
        raise ValueError("specify exactly one of test_fraction or test_path")
    ratings_path = Path(ratings_path)
    rows = _parse_rating_rows(ratings_path, rating_range)
    entries = _dedupe_last_wins(rows, str(ratings_path))

    test_entries: dict[tuple[int, int], float] = {}
    if test_path is not None:
        test_rows = _parse_rating_rows(Path(test_path), rating_range)
        test_entries = _dedupe_last_wins(test_rows, str(test_path))

    users = sorted({u for u, _ in entries} | {u for u, _ in test_entries})
    items = sorted({i for _, i in entries} | {i for _, i in test_entries})
    user_id = {u: k for k, u in enumerate(users)}
    item_id = {i: k for k, i in enumerate(items)}

    triples = np.array(
        [[user_id[u], item_id[i], r] for (u, i), r in sorted(entries.items())]
    )
    if test_path is not None:
        test_keys = {(user_id[u], item_id[i]) for u, i in test_entries}
        train = np.array(
            [t for t in triples if (int(t[0]), int(t[1])) not in test_keys]
        )
        test = np.array(
            [[user_id[u], item_id[i], r] for (u, i), r in sorted(test_entries.items())]
        )
    else:
        rng = np.random.default_rng(seed)
        n_test = int(round(test_fraction * len(triples)))
        perm = rng.permutation(len(triples))
        test = triples[np.sort(perm[:n_test])]
        train = triples[np.sort(perm[n_test:])]

    social_pairs = _parse_pairs(Path(social_path).read_text().splitlines(), str(social_path))
    social_edges = []
    for u, v, _ in social_pairs:
        if u in user_id and v in user_id:
            social_edges.append((user_id[u], user_id[v]))
    social = Graph.from_edges(len(users), social_edges)

    return RatingData(
        n_users=len(users),
        n_items=len(items),
        train=train.reshape(-1, 3),
        test=test.reshape(-1, 3),
        social=social,
        rating_range=rating_range,
    )
