from irmcache import i_integral, i_table_build, make_explicit

# ### An independent check on the table
#
# Every entry of the subset table also has a representation as a
# one-dimensional integral over [0, 1].  Integrating it numerically gives an
# oracle that shares no code with the dynamic program.

pop = make_explicit([0.4, 0.25, 0.15, 0.1, 0.06, 0.04])
table = i_table_build(pop, 3)

for s, value in table.items():
    if s.size == 0:
        continue
    res = i_integral(pop, s, tol=1e-11)
    print(f"J={s.items()!s:12}  table {value:.14f}  quadrature {res.value:.14f}  "
          f"est. error {res.error_estimate:.1e}  ({res.evaluations} evaluations)")
