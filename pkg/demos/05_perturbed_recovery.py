"""
Recovery under a small unitary perturbation
===========================================

Rotate the permutation unitary by exp(i theta H) with H a random Hermitian
band.  Entries smear out, but each column keeps one dominant entry, so the
locators still find the planted permutation.  Increasing theta eventually
breaks concentration and the pipeline says where.
"""

import numpy as np
import scipy.sparse as sp

from coarse_rigidity import (
    IsometryData,
    PipelineConfig,
    SparseOperator,
    closeness_level,
    full_pipeline,
    line_filtration,
)
from coarse_rigidity.scenarios import perturbed_permutation, random_bounded_permutation

n = 120
X = line_filtration(n, 1)
for theta in (0.1, 0.4, 0.8, 1.5):
    rng = np.random.default_rng(0)
    sigma = random_bounded_permutation(n, 4, rng)
    u = perturbed_permutation(sigma, theta, 1, rng)
    iso = IsometryData(SparseOperator(sp.csr_array(u)), X, X)
    res = full_pipeline(iso, PipelineConfig(delta=0.5, K=12))
    if res.ok:
        lv = closeness_level(res.h, sigma, X).level
        print(f"theta={theta}: {res.verdict}, closeness(h, sigma) = {lv}, "
              f"max locator sizes {res.locators.max_sizes}")
    else:
        print(f"theta={theta}: stopped at {res.failed_stage}")
