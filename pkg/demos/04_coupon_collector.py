from irmcache import ccp_curve, expected_partial_time, make_parametric, uniform_expected_time

# ### How long until j distinct items have been seen?
#
# The layer sums of the subset table give the expected time for a partial
# coupon collection.  The curve below lists three exact routes side by side.

pop = make_parametric("geometric", 8, 0.7)
print(ccp_curve(pop, range(pop.m + 1)).to_csv())

# ### Uniform sanity check
#
# For equal probabilities the answer is m (H_m - H_{m-j}).

uni = make_parametric("uniform", 8)
for j in range(9):
    print(j, expected_partial_time(uni, j), uniform_expected_time(8, j))
