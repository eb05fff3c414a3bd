"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module is used. Setting ``GF2RANK_PURE=1`` forces
the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

_impl = _pykernels
BACKEND = "python"

if os.environ.get("GF2RANK_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

reduce_vec = _impl.reduce_vec
insert_row = _impl.insert_row
echelon_of = _impl.echelon_of
has_rank_one_basis = _impl.has_rank_one_basis
reduce_all = _impl.reduce_all
bdez_tree = _impl.bdez_tree
apply_table = _impl.apply_table

__all__ = [
    "BACKEND",
    "reduce_vec",
    "insert_row",
    "echelon_of",
    "has_rank_one_basis",
    "reduce_all",
    "bdez_tree",
    "apply_table",
]
