from .config import load_config
from .datasets import (
    DatasetBundle,
    RatingData,
    load_ratings,
    load_tu_dataset,
    read_edge_list,
    write_tu_dataset,
)
from .reports import EvalReport, write_embeddings, write_report, write_signals

__all__ = [
    "DatasetBundle",
    "RatingData",
    "EvalReport",
    "load_config",
    "load_ratings",
    "load_tu_dataset",
    "read_edge_list",
    "write_tu_dataset",
    "write_embeddings",
    "write_report",
    "write_signals",
]
