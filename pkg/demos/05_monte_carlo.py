from irmcache import king_miss_rate, make_parametric, simulate_lru

# ### Simulating the cache
#
# A straightforward LRU simulation driven by independent draws should land
# within a few standard errors of the exact miss rate.

pop = make_parametric("zipf", 12, 1.0)
for j in (1, 3, 6, 9):
    est = simulate_lru(pop, j, 200_000, seed=j)
    exact = king_miss_rate(pop, j)
    print(f"j={j}  simulated {est.mean:.5f} +/- {est.std_error:.5f}  exact {exact:.5f}  "
          f"z={(est.mean - exact) / est.std_error:+.2f}")
