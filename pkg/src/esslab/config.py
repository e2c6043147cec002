"""Shared tolerances and the thread cap.

All tolerances are overridable per call site and from the CLI (--tol-* flags).
ESSLAB_THREADS caps the worker count used for embarrassingly parallel maps;
results are always assembled in submission order, so the output is identical
for every cap value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    merge: float = 1e-9          # structural union merge tolerance (tau_merge)
    eig: float = 1e-10           # bisection bracket width for eigenvalues
    root: float = 1e-12          # discriminant band-edge bisection width
    zero_angle: float = 1e-10    # angular tolerance for unit-circle zeros
    cnorm_rel: float = 1e-8      # relative accuracy of the commutator norm
    persist_delta: float = 0.02  # persistence filter radius for truncation clouds
    torus_refine: float = 1e-6   # grid-refinement stopping change for torus distance
    exact_form: float = 1e-12    # residual tolerance on exactly constructed limit forms
    stream_form: float = 1e-6    # residual tolerance on stream-derived limit forms

    def override(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT = Tolerances()


def thread_cap() -> int:
    raw = os.environ.get("ESSLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
