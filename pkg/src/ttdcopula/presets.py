"""Built-in synthetic ground truth for a ten-segment urban arterial.

Segment mixtures are the reference per-segment three-component fits; their
weights are rounded and are rescaled to sum to one.  Dependence
between adjacent segments is given as Kendall taus.
"""
from __future__ import annotations

import numpy as np

from .copulas import CopulaModel
from .dependence import tau_to_param
from .marginals import GmmParams
from .tripdata import SynthSpec

# (means, sigmas, weights) per segment, seconds
LEOPOLDSTRASSE_GMMS = (
    ((16.08, 31.41, 62.92), (5.25, 9.79, 12.65), (0.31, 0.34, 0.34)),
    ((5.41, 8.86, 16.31), (1.44, 2.68, 5.58), (0.52, 0.38, 0.09)),
    ((8.92, 14.55, 29.37), (2.03, 4.06, 9.55), (0.43, 0.34, 0.22)),
    ((3.11, 5.72, 10.33), (0.72, 1.69, 3.26), (0.43, 0.38, 0.17)),
    ((9.46, 17.58, 36.01), (2.18, 5.26, 10.38), (0.33, 0.38, 0.28)),
    ((6.43, 12.26, 29.55), (1.53, 3.94, 5.36), (0.46, 0.35, 0.17)),
    ((8.24, 13.30, 27.82), (1.68, 3.75, 10.94), (0.54, 0.37, 0.07)),
    ((2.76, 3.97, 7.09), (0.48, 0.91, 2.69), (0.48, 0.38, 0.12)),
    ((3.59, 5.42, 10.17), (0.64, 1.34, 3.94), (0.52, 0.35, 0.11)),
    ((6.67, 11.29, 22.46), (1.32, 3.22, 8.64), (0.52, 0.35, 0.11)),
)

# Kendall tau between segments (i, i+1), i = 1..9
LEOPOLDSTRASSE_TAUS = (0.318, 0.604, 0.698, 0.602, 0.417, 0.490, 0.639, 0.835, 0.748)

LEOPOLDSTRASSE_TRIPS = 4495


def leopoldstrasse_marginals() -> tuple[GmmParams, ...]:
    return tuple(GmmParams.normalized(*row) for row in LEOPOLDSTRASSE_GMMS)


def leopoldstrasse_pair_alpha(first_segment: int) -> float:
    """Clayton parameter for segments (first_segment, first_segment + 1)."""
    return tau_to_param("clayton", LEOPOLDSTRASSE_TAUS[first_segment - 1])


def leopoldstrasse_alpha() -> float:
    """Exchangeable Clayton parameter from the mean adjacent tau."""
    return tau_to_param("clayton", float(np.mean(LEOPOLDSTRASSE_TAUS)))


def leopoldstrasse_spec(n_trips: int = LEOPOLDSTRASSE_TRIPS, seed: int = 42,
                        segment_ids=None, gps_artifact: float = 0.0) -> SynthSpec:
    """Ground truth over ``segment_ids`` (default: all ten).

    A consecutive pair uses that pair's own Clayton parameter; anything else
    uses one exchangeable Clayton parameter from the mean adjacent tau.
    """
    ids = tuple(segment_ids) if segment_ids is not None else tuple(range(1, 11))
    margs = leopoldstrasse_marginals()
    if any(not 1 <= s <= 10 for s in ids):
        raise ValueError("leopoldstrasse segments are numbered 1..10")
    if len(ids) == 2 and ids[1] == ids[0] + 1:
        alpha = leopoldstrasse_pair_alpha(ids[0])
    else:
        alpha = leopoldstrasse_alpha()
    coupling = CopulaModel("clayton", len(ids), alpha=alpha)
    return SynthSpec(tuple(margs[s - 1] for s in ids), coupling, n_trips, seed, ids,
                     gps_artifact)


BUILTIN_SPECS = {"leopoldstrasse": leopoldstrasse_spec}
