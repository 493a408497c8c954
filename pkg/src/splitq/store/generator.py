"""Synthetic event generator.

Events carry a variable-length list of muons with (pt, eta, phi) attributes.
The distributions are fixed, arbitrary defaults; statistical tests derive
their own expectations from the parameters rather than from magic numbers.
Generation is a pure function of (n, seed, params).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .columnar import ColumnarDataset
from .schema import FLOAT64, Primitive, Schema, list_of, record


@dataclass(frozen=True)
class GeneratorParams:
    """Distribution parameters for synthetic events.

    Muon multiplicity is Poisson(mean_multiplicity) clamped to
    max_multiplicity; pt is exponential(pt_mean) shifted by pt_min;
    eta is uniform on [-eta_max, eta_max]; phi is uniform on [-pi, pi).
    """

    mean_multiplicity: float = 2.5
    max_multiplicity: int = 16
    pt_mean: float = 30.0
    pt_min: float = 3.0
    eta_max: float = 2.5


def muon_schema() -> Schema:
    return Schema(
        list_of(
            record(
                {
                    "muons": list_of(
                        record(
                            {
                                "pt": Primitive(FLOAT64),
                                "eta": Primitive(FLOAT64),
                                "phi": Primitive(FLOAT64),
                            }
                        )
                    )
                }
            )
        )
    )


MUONS_PATH = "item.muons"
PT_PATH = "item.muons.item.pt"
ETA_PATH = "item.muons.item.eta"
PHI_PATH = "item.muons.item.phi"


def generate_events(n: int, seed: int, params: GeneratorParams = GeneratorParams()) -> ColumnarDataset:
    """Generate ``n`` events deterministically from ``seed`` and ``params``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(seed)
    # Draw order is fixed: multiplicities, then pt, eta, phi.
    counts = np.minimum(rng.poisson(params.mean_multiplicity, n), params.max_multiplicity)
    counts = counts.astype(np.int64)
    total = int(counts.sum())
    pt = rng.exponential(params.pt_mean, total) + params.pt_min
    eta = rng.uniform(-params.eta_max, params.eta_max, total)
    phi = rng.uniform(-math.pi, math.pi, total)

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return ColumnarDataset(
        muon_schema(),
        {MUONS_PATH: offsets},
        {PT_PATH: pt, ETA_PATH: eta, PHI_PATH: phi},
        n,
    )
