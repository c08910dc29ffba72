# # Two classical families: ADM thresholds and Aubert's energy
#
# The ADM energy `(l1^2 + l2^2)^2 - 2 gamma (l1^2 + l2^2) l1 l2` changes
# character at three values of `gamma`: it is convex up to `2 sqrt(2) / 3`,
# polyconvex up to `1` and rank-one convex up to `2 / sqrt(3)`. The scans
# below bracket each threshold from both sides.

# %%
import numpy as np

from convexlab import (
    ADM_CONVEX,
    ADM_POLYCONVEX,
    ADM_RANK_ONE,
    Mat2,
    adm,
    aubert,
    aubert_connect_path,
    compactness_check,
    convexity_scan,
    eval_matrix,
    grid_connectivity,
    polyconvexity_falsify,
    rank_one_scan,
)

print(f"convex <= {ADM_CONVEX:.6f}, polyconvex <= {ADM_POLYCONVEX}, rank-one <= {ADM_RANK_ONE:.6f}")

# %% [markdown]
# ## Convexity

# %%
for g in (0.94, 0.95):
    print(g, convexity_scan(adm(g)).verdict)

# %% [markdown]
# ## Polyconvexity

# %%
for g in (0.9, 1.1):
    print(g, polyconvexity_falsify(adm(g)).verdict)

# %% [markdown]
# ## Rank-one convexity
#
# Past the last threshold the scan returns a base matrix and a rank-one
# direction with a negative second difference.

# %%
for g in (1.1, 1.2):
    scan = rank_one_scan(adm(g))
    print(g, scan.verdict)
    if scan.witness is not None:
        print("   ", scan.witness.to_dict())

# %% [markdown]
# For `gamma > 0` the ADM sublevel sets are unbounded: along `(1/n) id`
# the energy tends to zero from below.

# %%
print(compactness_check(adm(1.1), 1.0).counter_samples[:2])

# %% [markdown]
# ## Aubert's energy
#
# Aubert's energy is rank-one convex but not polyconvex. Its zero sublevel
# set is not compact, since it contains the whole diagonal ray.

# %%
A = aubert()
print([eval_matrix(A, Mat2.diag(s, s)) for s in (0.5, 1.0, 2.0)])
print(polyconvexity_falsify(A).verdict)
print(compactness_check(A, 0.0).verdict)

# %% [markdown]
# Two matrices in a common sublevel set are still joined by a three-piece
# path: shrink the smaller singular value, slide along the diagonal, then
# open up again.

# %%
F = Mat2.diag(1.0, 0.5)
Ft = Mat2.diag(2.0, 1.0)
c = max(eval_matrix(A, F), eval_matrix(A, Ft))
path = aubert_connect_path(F, Ft, c)
for seg in path.segments:
    print(seg.name)
print(path.check(A))

# %% [markdown]
# The sublevel set `{W <= 0}` is a single component on the default grid.

# %%
print(grid_connectivity(A, 0.0).count)
vals = np.array(path.energies(A, n=50))
print("energy along path stays below", c, ":", bool(np.all(vals <= c + 1e-12)))
