"""Tracking a plane with six radars that sometimes miss.

Each radar reports a noisy distance to the plane while it is in range.
Once the plane leaves, the radar almost always reports its range exactly,
a point mass sitting on the edge of a continuous noise model. A bootstrap particle filter
treats the point mass and the density as commensurable and gets confused
whenever a radar reports its cap. The lexicographic filter does not.
"""
from mixppl.experiments import aircraft_experiment, format_table, load_aircraft, trajectory_mse
from mixppl.infer import lpf_run, naive_pf_run

model, truth = load_aircraft()

lpf = lpf_run(model, 2000, seed=0)
pf = naive_pf_run(model, 2000, seed=0)
print(" t   true x, y         lexicographic       naive")
for row, a, b in zip(truth, lpf, pf):
    t = row["t"]
    print(f"{t:>2}   {row['X_true']:6.2f} {row['Y_true']:6.2f}    "
          f"{a[f'X(@{t})']:6.2f} {a[f'Y(@{t})']:6.2f}    {b[f'X(@{t})']:6.2f} {b[f'Y(@{t})']:6.2f}")
print(f"trajectory MSE: lexicographic {trajectory_mse(lpf, truth):.3f}, naive {trajectory_mse(pf, truth):.3f}")

print("\nMSE over 10 seeds per particle count:")
_, summary = aircraft_experiment(particles=(100, 1000), seeds=range(10))
print(format_table(summary))
means = {(r["algo"], r["particles"]): r["mean"] for r in summary}
for k in (100, 1000):
    print(f"naive / lexicographic at {k} particles: {means['pf', k] / means['lpf', k]:.2f}")
