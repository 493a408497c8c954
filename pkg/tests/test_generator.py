import math

import numpy as np
from scipy import stats

from splitq.store import GeneratorParams, generate_events, validate
from splitq.store.generator import ETA_PATH, MUONS_PATH, PHI_PATH, PT_PATH


def test_empty():
    ds = generate_events(0, seed=1)
    assert ds.num_entries == 0
    assert ds.offsets[MUONS_PATH].tolist() == [0]
    assert ds.attributes[PT_PATH].size == 0
    assert validate(ds) == []


def test_deterministic():
    a = generate_events(10_000, seed=42)
    b = generate_events(10_000, seed=42)
    assert a.equals(b)
    c = generate_events(10_000, seed=43)
    assert not a.equals(c)


def test_params_change_output():
    a = generate_events(1000, seed=1)
    b = generate_events(1000, seed=1, params=GeneratorParams(mean_multiplicity=5.0))
    assert not a.equals(b)


def test_valid_and_ranges():
    params = GeneratorParams()
    ds = generate_events(20_000, seed=7, params=params)
    assert validate(ds) == []
    counts = np.diff(ds.offsets[MUONS_PATH])
    assert counts.min() >= 0 and counts.max() <= params.max_multiplicity
    assert ds.attributes[PT_PATH].min() >= params.pt_min
    eta = ds.attributes[ETA_PATH]
    assert eta.min() >= -params.eta_max and eta.max() <= params.eta_max
    phi = ds.attributes[PHI_PATH]
    assert phi.min() >= -math.pi and phi.max() < math.pi


def test_multiplicity_mean_within_3_sigma():
    # Expected mean/variance of min(Poisson(lam), cap), computed analytically
    # here rather than assumed.
    params = GeneratorParams()
    n = 100_000
    ds = generate_events(n, seed=1, params=params)
    counts = np.diff(ds.offsets[MUONS_PATH])

    lam, cap = params.mean_multiplicity, params.max_multiplicity
    k = np.arange(0, cap + 1)
    pmf = stats.poisson.pmf(k, lam)
    tail = float(stats.poisson.sf(cap, lam))
    mean = float((k * pmf).sum()) + cap * tail
    second = float((k**2 * pmf).sum()) + cap**2 * tail
    sigma_of_mean = math.sqrt(second - mean**2) / math.sqrt(n)

    assert abs(counts.mean() - mean) < 3 * sigma_of_mean


def test_pt_mean_within_3_sigma():
    params = GeneratorParams()
    ds = generate_events(50_000, seed=3, params=params)
    pt = ds.attributes[PT_PATH]
    expected = params.pt_mean + params.pt_min
    sigma_of_mean = params.pt_mean / math.sqrt(pt.size)
    assert abs(pt.mean() - expected) < 3 * sigma_of_mean
