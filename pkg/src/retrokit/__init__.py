"""Single-step retrosynthesis toolkit.

Molecular graph core, reaction center labeling, semi-template mining and
application, a small autodiff engine, relational graph attention models and
an end-to-end prediction pipeline, all on numpy with optional compiled
kernels.
"""

__version__ = "0.1.0"
