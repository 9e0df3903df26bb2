"""A student reports a perfect 4.0 GPA. Where did they study?

In the USA a 4.0 has positive probability: grades are capped, so a slice of
mass sits exactly on 4. In India grades are spread uniformly over [0, 10] and
any single value has density but zero probability. The true answer is
therefore "USA, with certainty".

Plain likelihood weighting multiplies the mass 0.01 and the density 0.099
as if they were the same kind of number, and settles on about 0.09.
The lexicographic engine keeps count of how many density factors each
sample picked up and only trusts the samples with the fewest.
"""
from mixppl.dsl import load_model
from mixppl.experiments import format_table, gpa_experiment
from mixppl.infer import irlw_run, llw_run, naive_lw_run
from mixppl.verify import gpa_naive_limit, irlw_gpa_cell_limit

model = load_model("gpa_two_country")
label = model.queries[0].label

est = llw_run(model, 10_000, seed=0)
print(f"lexicographic: P(USA) = {est[label]}  (density count of survivors: {est.d_star})")
est = naive_lw_run(model, 10_000, seed=0)
print(f"naive:         P(USA) = {est[label]:.4f}  (it converges to {gpa_naive_limit():.4f})")

# Refining the observation to a small interval recovers the right answer slowly.
print("\nrefining the evidence to a cell of width 2^-n:")
for n in (1, 5, 10, 20):
    est = irlw_run(model, 20_000, n, seed=0)
    print(f"  n={n:>2}  estimate {est[label]:.6f}  limit {irlw_gpa_cell_limit(n):.6f}")

print("\nsweep over sample sizes and seeds:")
_, summary = gpa_experiment(samples=(100, 1000, 10000), seeds=range(5))
print(format_table(summary))
