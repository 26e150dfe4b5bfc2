"""
Recovering a bijection from a permutation isometry
==================================================

Plant a permutation with bounded displacement, build the 0/1 unitary it
induces, and ask the pipeline to get the permutation back together with
certificates that it is a coarse equivalence of the line.
"""

import numpy as np

from coarse_rigidity import PipelineConfig, embed_from_map, full_pipeline, line_filtration
from coarse_rigidity.scenarios import random_bounded_permutation

n = 200
X = line_filtration(n, 1)
sigma = random_bounded_permutation(n, 5, np.random.default_rng(0))
print("max displacement:", np.abs(sigma - np.arange(n)).max())

res = full_pipeline(embed_from_map(sigma, X, X), PipelineConfig(delta=0.5, K=12))
for stage in res.stages:
    print(f"  {stage['stage']:<24} {stage['status']}")
print("verdict:", res.verdict)
print("h == sigma:", np.array_equal(res.h, sigma))
print("forward distortion:", res.distortion_f.forward)
print("closeness of g.f to the identity:", res.closeness_gf.level)
