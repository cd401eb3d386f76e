"""Prior elicitation walkthrough.

The only number a practitioner must supply is theta0: a small baseline
interaction probability for two actors that sit a typical latent distance
apart.  Everything else — the inverse-gamma scales for the variance
components and the normal variances for the hierarchy means — is derived
from the geometry of the K-dimensional latent space.

Run:  python3 demos/01_elicitation.py
"""

import numpy as np

import mnlpm

# The backbone of the elicitation is the expected distance between two
# independent N(0, (2/9) I_K) points.  It grows slowly with K:
print("expected latent distance by dimension")
for k in range(1, 7):
    e_d, sd_d = mnlpm.mean_latent_distance(k)
    print(f"  K={k}:  E[d] = {e_d:.3f}  sd[d] = {sd_d:.3f}")
print()

# elicit() turns (K, theta0) into a full hyperparameter set.  The layer
# weight variance comes from matching the baseline probability theta0 at
# distance E[d]; the intercept variance is scaled to the same distance.
print("elicited constants (theta0 = 0.1)")
rows = [mnlpm.elicitation_table_row(mnlpm.elicit(k, 0.1)) for k in range(1, 7)]
cols = list(rows[0])
print("  " + "  ".join(f"{c:>13s}" for c in cols))
for row in rows:
    print(f"  {int(row['K']):13d}"
          + "  ".join(f"{row[c]:13.3f}" for c in cols[1:]))
print()

# theta0 must leave room above E[d] on the probit scale; elicit() refuses
# values that don't:
try:
    mnlpm.elicit(K=4, theta0=0.2)
except ValueError as err:
    print(f"elicit(K=4, theta0=0.2) rejected: {err}")
print()

# The elicited priors can be pushed forward through the model to see the
# distribution they induce on the probability of a single edge.
hyper = mnlpm.elicit(K=3, theta0=0.1)
probs = mnlpm.prior_predictive_probabilities(hyper, n_draws=10_000, seed=0)
qs = np.percentile(probs, [5, 25, 50, 75, 95])
print("induced prior on interaction probabilities (K=3):")
print("  5/25/50/75/95 percentiles:", "  ".join(f"{q:.3f}" for q in qs))

# Hyperparameters serialize to JSON for use with the CLI
# (`mnlpm fit --hyper hyper.json`):
print()
print(hyper.to_json())
