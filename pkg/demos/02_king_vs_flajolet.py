from irmcache import make_parametric, miss_rate_curve

# ### Two formulas for the same miss rate
#
# King's form sums over the subsets a cache of size j can hold; Flajolet's
# form sums over the smaller subsets that precede a hit.  For a skewed law
# the two columns below agree to rounding.

pop = make_parametric("zipf", 10, 0.8)
curve = miss_rate_curve(pop, range(1, pop.m + 1))
print(curve.to_csv())
print("largest disagreement:", curve.max_discrepancy)

# ### Exact arithmetic
#
# With rational weights the tables can be built from Fractions, and the two
# forms then agree exactly, not just to 1e-16.

pop = make_parametric("zipf", 6, 1.0)
exact = miss_rate_curve(pop, range(1, pop.m), exact=True)
for e in exact.entries:
    print(e.j, e.mr_king, e.mr_king == e.mr_flajolet)
