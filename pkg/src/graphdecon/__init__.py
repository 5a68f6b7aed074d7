"""Graph autoencoders with spectral-wavelet deconvolutional decoders.

Smoothing graph convolutions plus attention pooling on the way down;
inverse (high-pass) filtering with learned wavelet-domain de-noising on
the way back up.  Everything runs on numpy/scipy with a small built-in
reverse-mode engine, so the whole stack is inspectable end to end.
"""

from . import autodiff, filters, generators, graph, io, model, tasks, training

__all__ = [
    "autodiff",
    "filters",
    "generators",
    "graph",
    "io",
    "model",
    "tasks",
    "training",
]

__version__ = "0.1.0"
