"""Exact point counts of bounded anticanonical height on the split quintic
del Pezzo surface over Q and five imaginary quadratic fields, and the
predicted leading constant."""

from __future__ import annotations

__version__ = "0.1.0"

from .nfield import LABELS, make_field  # noqa: E402
from .cubics import canonical_spec, load_height_spec  # noqa: E402
from .enumerate import count_direct, count_torsor_naive, count_torsor_reduced  # noqa: E402
from .constants import assemble_constant, euler_product  # noqa: E402

__all__ = [
    "__version__",
    "LABELS",
    "make_field",
    "canonical_spec",
    "load_height_spec",
    "count_direct",
    "count_torsor_naive",
    "count_torsor_reduced",
    "assemble_constant",
    "euler_product",
]
