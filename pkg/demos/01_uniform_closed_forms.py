import math

import numpy as np

from irmcache import i_table_build, king_miss_rate, make_parametric, uniform_miss_rate

# ### A uniform popularity law
#
# When every item is equally popular, an LRU cache of size j holds j of the
# m items and misses with probability 1 - j/m.  The subset table makes the
# same prediction the long way round, by summing over every resident set.

m = 8
pop = make_parametric("uniform", m)
table = i_table_build(pop, m - 1)

for j in range(1, m):
    print(f"j={j}  subset sum {king_miss_rate(pop, j, table):.15f}  closed form {uniform_miss_rate(m, j):.15f}")

# ### The table itself
#
# Under the uniform law every subset of size k carries the same weight,
# 1 / C(m-1, k).

for k in range(m):
    values = table.layer(k).values
    print(f"k={k}  {len(values):3d} subsets  spread {np.ptp(values):.1e}  "
          f"value * C(m-1,k) = {values[0] * math.comb(m - 1, k):.15f}")
