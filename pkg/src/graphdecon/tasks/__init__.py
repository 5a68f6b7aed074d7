from .classification import classify_eval, embed_classify_run
from .reconstruction import band_energies, reconstruct_demo
from .recsys import inject_noise, intra_list_similarity, mean_ils, recsys_run

__all__ = [
    "band_energies",
    "classify_eval",
    "embed_classify_run",
    "inject_noise",
    "intra_list_similarity",
    "mean_ils",
    "reconstruct_demo",
    "recsys_run",
]
