"""
Embeddings land in a corner
===========================

An injective map x -> 2x gives an isometry that is not onto.  The pipeline
recovers f, leaves g undefined off the image, skips the bijection step and
reports a coarse embedding.
"""

import numpy as np

from coarse_rigidity import embed_from_map, full_pipeline, line_filtration

X, Y = line_filtration(16, 1), line_filtration(32, 2)
iso = embed_from_map(2 * np.arange(16), X, Y)
u = iso.U.toarray()
print("U*U = I:", np.allclose(u.conj().T @ u, np.eye(16)))
print("UU* projects onto the even points:", np.allclose(np.diag(u @ u.conj().T), np.arange(32) % 2 == 0))

res = full_pipeline(iso)
print("f:", res.f)
print("g:", res.g)
print([s for s in res.stages if s["stage"] == "cantor_bernstein"][0])
print("verdict:", res.verdict)
print("forward table", res.distortion_f.forward[:6], "backward table", res.distortion_f.backward[:6])
