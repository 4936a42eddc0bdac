"""Choosing a test plan by producer's and consumer's risks.

For a plan (n, c) the classical risks fix pi at an acceptable level pi_0 or
a rejectable level pi_1. The posterior risks instead ask, under a prior for
pi, how likely a failed test is to have rejected a good product and how
likely a passed test is to have accepted a bad one.

Run with ``python3 tutorials/risk_plans.py``.
"""

from rdt_assurance import risk
from rdt_assurance.binomial import BetaPrior, TestPlan
from rdt_assurance.stats import RandomStream, sample_beta

levels = risk.RiskLevels(pi_0=0.96, pi_1=0.90, alpha_max=0.05, beta_max=0.05)
prior = BetaPrior(19, 1)
pi = sample_beta(RandomStream(3), prior.a, prior.b, 200_000)

plan = TestPlan(n=35, c=3)
classical = risk.classical_risks(plan, levels)
average = risk.average_risks_from_draws(plan, levels, pi)
posterior = risk.posterior_risks(plan, levels, pi)
exact = risk.posterior_risks_conjugate(plan, levels, prior)

print(f"plan n={plan.n}, c={plan.c}")
print(f"  classical  producer {classical.producer:.4f}  consumer {classical.consumer:.4f}")
print(f"  average    producer {average.producer:.4f}  consumer {average.consumer:.4f}")
print(f"  posterior  producer {posterior.producer:.4f}  consumer {posterior.consumer:.4f}  (Monte Carlo)")
print(f"  posterior  producer {exact.producer:.4f}  consumer {exact.consumer:.4f}  (closed form)")

res = risk.find_min_plan(levels, pi, n_max=300)
if res.feasible:
    print(f"\nsmallest plan meeting both posterior bounds: n={res.plan.n}, c={res.plan.c} "
          f"(producer {res.risks.producer:.4f}, consumer {res.risks.consumer:.4f})")
else:
    print("\nno plan with n <= 300 meets both bounds")
