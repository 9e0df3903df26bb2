import itertools
import math

import numpy as np
import pytest
from scipy import stats

from mixppl.dsl import MODELS_DIR, load_model
from mixppl.errors import EnumerationError
from mixppl.experiments import AIRCRAFT_DATA_SEED, AIRCRAFT_T, aircraft_dataset
from mixppl.infer import llw_run
from mixppl.verify import (exact_posterior_discrete, expected_density_at, generate_ssm_dataset,
                           gpa_naive_limit, irlw_gpa_cell_limit, read_truth_csv, scale_naive_limit)

from .networks import delta_method_se

BAYES = """\
random Bool X ~ BooleanDistrib(0.3);
random Bool Y ~ if X then BooleanDistrib(0.9) else BooleanDistrib(0.2);
obs Y = true;
query X;
"""

COUNTS = {0: 0.5, 1: 0.3, 2: 0.2}
GRADE = {"USA": 0.3, "India": 0.1, "NewZealand": 0.05}

TRUNCATED_GPA = """\
type Applicant, Country;
distinct Country NewZealand, India, USA;
#Applicant(Nationality = c) ~ Categorical({0 -> 0.5, 1 -> 0.3, 2 -> 0.2});
origin Country Nationality(Applicant);
random Real GPA(Applicant s) ~
  if Nationality(s) == USA then Categorical({4.0 -> 0.3, 3.0 -> 0.7})
  else if Nationality(s) == India then Categorical({4.0 -> 0.1, 2.0 -> 0.9})
  else Categorical({4.0 -> 0.05, 1.0 -> 0.95});
random Applicant David ~ UniformChoice({a for Applicant a});
obs GPA(David) = 4.0;
query Nationality(David) == USA;
"""


def truncated_gpa_posterior():
    """P(USA | GPA = 4) by summing over all count triples by hand."""
    num = den = 0.0
    for n_nz, n_in, n_us in itertools.product(COUNTS, repeat=3):
        total = n_nz + n_in + n_us
        if not total:
            continue
        p = COUNTS[n_nz] * COUNTS[n_in] * COUNTS[n_us]
        num += p * n_us * GRADE["USA"] / total
        den += p * (n_us * GRADE["USA"] + n_in * GRADE["India"] + n_nz * GRADE["NewZealand"]) / total
    return num / den


class TestEnumeration:
    def test_bayes(self):
        assert exact_posterior_discrete(load_model(BAYES))["X"] == pytest.approx(0.27 / (0.27 + 0.14), rel=1e-12)

    def test_prior_marginals(self):
        m = load_model("random Bool X ~ BooleanDistrib(0.3); random Integer K ~ Categorical({1 -> 0.5, 3 -> 0.5});"
                       "query X; query K;")
        out = exact_posterior_discrete(m)
        assert out["X"] == pytest.approx(0.3) and out["K"] == pytest.approx(2.0)

    def test_open_universe(self):
        m = load_model(TRUNCATED_GPA)
        exact = exact_posterior_discrete(m)["Nationality(David) == USA"]
        assert exact == pytest.approx(truncated_gpa_posterior(), rel=1e-12)
        est = llw_run(m, 10_000, 0)
        label = "Nationality(David) == USA"
        assert abs(est[label] - exact) <= 3 * delta_method_se(est, label)

    def test_rejects_densities(self):
        with pytest.raises(EnumerationError):
            exact_posterior_discrete(load_model("scale"))

    def test_world_bound(self):
        m = load_model(" ".join(f"random Bool B{i} ~ BooleanDistrib(0.5);" for i in range(12))
                       + " ".join(f"query B{i};" for i in range(12)))
        with pytest.raises(EnumerationError, match="worlds"):
            exact_posterior_discrete(m, max_worlds=1000)


class TestQuadrature:
    def test_standard_normal_integrates_to_one(self):
        assert expected_density_at(stats.norm(0, 1), lambda m: stats.norm(m, 1e-3), 0.0) == pytest.approx(
            stats.norm.pdf(0.0), rel=1e-6)
        from scipy import integrate
        val, _ = integrate.quad(stats.norm.pdf, -np.inf, np.inf, epsabs=1e-13)
        assert abs(val - 1.0) <= 1e-9

    def test_scale_oracle_matches_closed_form(self):
        # Gaussian convolution of a truncated normal has a closed form via norm.cdf ratios
        d = stats.truncnorm(-0.4, 0.5, loc=0.5, scale=1.0)
        val = expected_density_at(d, lambda m: stats.norm(m, 1.0), 0.0)
        s2 = 2.0
        mu = 0.5 / s2
        sd = math.sqrt(0.5)
        z = d.cdf(1.0) - d.cdf(0.1)
        closed = (stats.norm.pdf(0.5, 0, math.sqrt(s2)) * (stats.norm.cdf(1.0, mu, sd) - stats.norm.cdf(0.1, mu, sd))
                  / (stats.norm.cdf(0.5) - stats.norm.cdf(-0.4)))
        assert z == pytest.approx(1.0)
        assert val == pytest.approx(closed, rel=1e-6)

    def test_point_mass(self):
        assert expected_density_at(0.7, lambda m: stats.norm(m, 1), 0.0) == pytest.approx(stats.norm.pdf(0.7))

    def test_symmetry(self):
        a = 1.3
        left = expected_density_at(stats.uniform(-a, 2 * a), lambda m: stats.norm(m, 1), 0.0)
        right = expected_density_at(stats.uniform(-a, 2 * a), lambda m: stats.norm(-m, 1), 0.0)
        assert left == pytest.approx(right, rel=1e-9)

    def test_limits(self):
        assert gpa_naive_limit() == pytest.approx(0.01 / (0.01 + 0.099))
        values = [scale_naive_limit(s) for s in (1.0, 2.0, 4.0)]
        assert values[0] > values[1] > values[2] > 0
        assert irlw_gpa_cell_limit(20) > 0.99


class TestDatasets:
    def test_deterministic(self):
        m = load_model("aircraft_model")
        assert generate_ssm_dataset(m, 3, 11, ["obs_dist"]) == generate_ssm_dataset(m, 3, 11, ["obs_dist"])
        assert generate_ssm_dataset(m, 3, 11, ["obs_dist"]) != generate_ssm_dataset(m, 3, 12, ["obs_dist"])

    def test_bundled_aircraft_matches_generator(self):
        text, truth = aircraft_dataset()
        assert (MODELS_DIR / "aircraft.blog").read_text(encoding="utf-8") == text
        assert (MODELS_DIR / "aircraft_truth.csv").read_text(encoding="utf-8") == truth
        rows = read_truth_csv(MODELS_DIR / "aircraft_truth.csv")
        assert [r["t"] for r in rows] == list(range(AIRCRAFT_T + 1))
        assert AIRCRAFT_DATA_SEED == 5
        assert set(rows[0]) == {"t", "X_true", "Y_true"}

    def test_single_step(self):
        obs, rows = generate_ssm_dataset(load_model("aircraft_model"), 0, 1, ["obs_dist"])
        assert len(rows) == 1 and obs.count("obs ") == 6
        assert all("(@0," in line for line in obs.splitlines())

    def test_noiseless(self):
        src = (MODELS_DIR / "aircraft_model.blog").read_text(encoding="utf-8")
        head, _, _ = src.partition("random Real obs_dist")
        m = load_model(head + "random Real obs_dist(Timestep t, t_radar r) ~ Dirac(dist(X(t), Y(t), r));\n"
                              "query X(t) for Timestep t;\n")
        obs, rows = generate_ssm_dataset(m, 2, 3, ["obs_dist"])
        px = [8.0, 5.0, -1.0, -4.0, -1.0, 5.0]
        py = [-1.0, 4.2, 4.2, -1.0, -6.2, -6.2]
        values = [float(line.split("=")[1].rstrip(";")) for line in obs.splitlines()]
        expected = [math.hypot(r["X_true"] - px[i], r["Y_true"] - py[i]) for r in rows for i in range(6)]
        assert values == pytest.approx(expected, rel=1e-15, abs=0)
