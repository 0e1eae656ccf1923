"""Power generators T(x) = x**-s: exact moments, fixed point and sample moments."""
import numpy as np

from wexfam import ModelParams, SeedStream, power_generator
from wexfam.asymptotics import empirical_moments, g1, g2, quadrature_moments, theorem1_moments

mu, sigma, s = 3.0, 0.5, 2.0
exact = theorem1_moments(mu, sigma, s)
print("exact moments:     ", np.asarray(exact))
print("quadrature moments:", np.asarray(quadrature_moments(mu, sigma, s)))

# %% The estimator functionals return the true parameters at the exact moments
print("g1, g2 at E(Y):", g1(exact), g2(exact))

# %% Sample moments approach the exact ones
gen = power_generator(s)
for n in (10**3, 10**4, 10**5, 10**6):
    emp = empirical_moments(gen, ModelParams(mu, sigma), n, SeedStream(4, n))
    print(n, np.max(np.abs(np.asarray(emp) - np.asarray(exact))), g1(emp), g2(emp))
