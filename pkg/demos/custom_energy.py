# # Checking a user-defined split energy
#
# An energy of the form `W(F) = h(K) + f(det F)` can be written as two
# one-line formulas. Derivatives are taken symbolically, so the same checks
# that run on the built-in energies run on the parsed one.

# %%
from convexlab import (
    ParseError,
    compactness_check,
    parse_energy_text,
    polyconvexity_falsify,
    split_rank_one_criterion,
)

# %% [markdown]
# ## A convex-in-K variant
#
# Replacing `t - log t` by `t^2` gives an isochoric part that grows faster;
# `f` stays the same.

# %%
E = parse_energy_text("""
name = k-squared
h = t^2
f = log(t) + 1/t
""")
rep = split_rank_one_criterion(E)
print("rank-one (split criterion):", rep.passed)
print("polyconvexity scan:", polyconvexity_falsify(E).verdict)
print("compactness at c = 4:", compactness_check(E, 4.0).verdict)

# %% [markdown]
# ## A volumetric part without a barrier
#
# Dropping `1/t` lets `f` go to minus infinity as `det -> 0`, so sublevel
# sets reach the boundary of GL+(2).

# %%
E = parse_energy_text("h = t - log(t)\nf = log(t)\n")
rep = compactness_check(E, 3.0)
print(rep.verdict)
for g in rep.growth:
    print("  ", g.message)

# %% [markdown]
# ## Parse errors point at the offending token

# %%
try:
    parse_energy_text("h = t +\nf = t\n")
except ParseError as err:
    print(err)
