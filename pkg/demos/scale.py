"""A fake coin and a noisy scale.

With genuine coins only, the scale reads a difference of exactly zero.
With a fake coin in the pan, the true difference is drawn from a truncated
normal and the reading adds Gaussian noise of width sigma. Observing a
reading of exactly zero is a positive-probability event in the first case
and a density event in the second, so a fake coin is ruled out for every
sigma.

The naive estimate depends on the noise level sigma. The lexicographic one
does not, which is the point of this demo.
"""
from mixppl.dsl import load_model
from mixppl.infer import llw_run, naive_lw_run
from mixppl.verify import scale_naive_limit

base = load_model("scale")

print("sigma   lexicographic   naive     naive limit")
for sigma in (0.5, 1.0, 2.0, 4.0):
    model = base.with_fixed(sigma=sigma)
    lex = llw_run(model, 20_000, seed=1)["hasFakeCoin"]
    naive = naive_lw_run(model, 20_000, seed=1)["hasFakeCoin"]
    print(f"{sigma:<7} {lex:<15} {naive:<9.4f} {scale_naive_limit(sigma):.4f}")
