"""Double weights from known marginals.

Covariate shift leaves the label conditional alone but moves the instance
marginal.  Classic fixes either reweight training samples by the density
ratio (unstable where the ratio is large) or downweight testing samples by
its inverse (overconfident where that is large).  The double-weighting
closed form caps both at once: beta = min(ratio, C), alpha = min(C/ratio, 1),
and the products alpha * p_te and beta * p_tr agree everywhere.
"""

import numpy as np

from dwshift.datagen import SyntheticConfig, gen_synthetic, ratio_sup_grid
from dwshift.weights import exact_double_weights, reweighted_weights, robust_weights

scenario = gen_synthetic(SyntheticConfig(delta=0.45, n=200, t=200, seed=7))
ds = scenario.dataset
marginals = scenario.marginals

B = ratio_sup_grid(marginals)
print(f"density-ratio supremum B = {B:.2f} (analytic (1-delta)/(0.5-delta) = {0.55 / 0.05:.2f})")

rw = reweighted_weights(marginals, ds.train_x, ds.test_x, B=B)
rb = robust_weights(marginals, ds.train_x, ds.test_x)
print(f"reweighted: max beta = {rw.beta.max():.2f} (a handful of samples dominate)")
print(f"robust:     max alpha = {rb.alpha.max():.2f} (overconfident regions)")

print("\nC sweep: capping beta costs alpha, trading estimation error for confidence")
for D in (1.0, 4.0, 25.0):
    pair = exact_double_weights(marginals, C=B / np.sqrt(D), train_x=ds.train_x, test_x=ds.test_x, B=B)
    print(
        f"  C = B/sqrt({D:5.1f}) = {B / np.sqrt(D):6.2f}: "
        f"max beta {pair.beta.max():6.2f}, mean alpha {pair.alpha.mean():.3f}"
    )

# the defining identity, checked pointwise on the training sample
pair = exact_double_weights(marginals, C=B / 2.0, train_x=ds.train_x, test_x=ds.test_x, B=B)
ptr, pte = marginals.densities(ds.train_x)
alpha_tr = pair.alpha_fn(ds.train_x)
gap = np.max(np.abs(alpha_tr * pte - pair.beta * ptr))
print(f"\npointwise identity |alpha * p_te - beta * p_tr|: max {gap:.2e}")
