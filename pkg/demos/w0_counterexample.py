# # A rank-one convex energy that is not polyconvex
#
# The energy `W0(F) = K - log K + log det F + 1/det F`, with `K` the linear
# distortion, passes the split rank-one test but admits no polyconvex
# minorant at one explicit pair of singular-value vectors. This script walks
# through both checks and then looks at the sublevel sets.

# %%
import math

import numpy as np

from convexlab import (
    Mat2,
    c_interval,
    compactness_check,
    connect_path,
    eval_matrix,
    grid_connectivity,
    polyconvexity_falsify,
    rank_one_scan,
    required_c_bound,
    split_rank_one_criterion,
    w0,
)

W = w0()
e = math.e

# %% [markdown]
# ## Evaluating the energy
#
# At the identity both `K` and `det` equal one, so `W0 = 1 + 1 = 2`.

# %%
print(eval_matrix(W, Mat2.identity()))
print(eval_matrix(W, Mat2(e**4, 0.0, 0.0, e**3)))

# %% [markdown]
# ## Rank-one convexity
#
# The split criterion reduces rank-one convexity to four scalar conditions
# on `h(t) = t - log t` and `f(t) = log t + 1/t`.

# %%
rep = split_rank_one_criterion(W)
print("h0 =", rep.h0.value, " f0 =", rep.f0.value)
for name in ("condition_i", "condition_ii", "condition_iii", "condition_iv"):
    cond = getattr(rep, name)
    print(f"{name:14s} passed={cond.passed}  worst margin={cond.worst_margin:.3e}")

# %% [markdown]
# A brute-force scan along rank-one lines agrees.

# %%
scan = rank_one_scan(W)
print(scan.verdict, "after", scan.evaluations, "second differences")

# %% [markdown]
# ## Polyconvexity
#
# Polyconvexity at `gamma` forces the coefficient `c` of `det` in the
# supporting affine function into an interval. Testing the minorant
# inequality at a second point `nu` yields a bound on `c` that lies outside
# that interval.

# %%
gamma, nu = (e**4, e**3), (e, 1.0)
iv = c_interval(W, *gamma)
theta, orient = required_c_bound(W, gamma, nu)
print(f"c must lie in [{iv.c_lo:.8f}, {iv.c_hi:.8f}]")
print(f"the minorant at nu needs c {orient} {theta:.8f}")

res = polyconvexity_falsify(W, [gamma], [nu])
print(res.verdict, " margin:", res.witness.margin)

# %% [markdown]
# The default log grid finds a witness on its own as well.

# %%
res = polyconvexity_falsify(W)
print(res.verdict, res.witness.gamma, res.witness.nu)

# %% [markdown]
# ## Sublevel sets
#
# Every sublevel set is compact and bounded away from `det = 0`.

# %%
for c in (3.0, 5.0, 10.0):
    rep = compactness_check(W, c)
    print(f"c = {c:g}: {rep.verdict}, radius {rep.radius:.3g}, margin {rep.margin:.3g}")

# %% [markdown]
# Any two matrices in the same sublevel set are joined by an explicit path
# of rotations, a det-preserving stretch and a conformal scaling.

# %%
F = Mat2(-2.0, 0.0, 0.0, -1.0)
Ft = Mat2(1.0, 0.5, -0.3, 1.2)
path = connect_path(W, F, Ft, 4.0)
for seg in path.segments:
    print(seg.name)
chk = path.check(W)
print("valid:", chk.valid, " max energy on path:", chk.max_energy)

# %% [markdown]
# A flood fill on a singular-value grid sees a single component.

# %%
for c in (2.1, 3.0, 5.0):
    print(c, grid_connectivity(W, c).count)
