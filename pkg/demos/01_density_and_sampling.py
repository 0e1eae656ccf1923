"""Density, mixture decomposition and sampling for a weighted Lindley model."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wexfam import NativeParams, SeedStream, builtin, mixture_components, pdf, sample

gen = builtin("weighted_lindley")
params = NativeParams("weighted_lindley", 2.0, 1.0).to_model()   # phi=2, lambda=1
print(params)

# %% The density is a two-component mixture
x = np.linspace(0.01, 8, 400)
f1, f2, w = mixture_components(gen, params, x)
print("mixing weight:", w)
print("max |f - mix|:", np.max(np.abs(pdf(gen, params, x) - ((1 - w) * f1 + w * f2))))

# %% Draws follow the density
y = sample(gen, params, 100_000, SeedStream(1))
fig, ax = plt.subplots()
ax.hist(y, bins=120, range=(0, 8), density=True, alpha=0.4, label="draws")
ax.plot(x, pdf(gen, params, x), label="density")
ax.plot(x, (1 - w) * f1, "--", label="component 1")
ax.plot(x, w * f2, "--", label="component 2")
ax.legend()
fig.savefig("density.png", dpi=100)
