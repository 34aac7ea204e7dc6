# coding: utf-8

# # Low-resolution quantization of array snapshots
#
# A mixed-ADC array digitizes the first M0 chains with high-resolution
# converters and the remaining M1 chains with b-bit converters. This notebook
# looks at what the b-bit chains do to a Gaussian snapshot stream, and how well
# the linear gain-plus-noise model describes it.

# In[1]:

import numpy as np

from mixadc_doa import (ArrayGeometry, MixedAdcConfig, SourceScene, aqnm_observe, distortion_factor,
                        lloydmax_codebook, quantize_true, synthesize_snapshots)
from mixadc_doa.covariance import sample_covariance, theoretical_covariance
from mixadc_doa.quantizer import mixed_true_observe

# ## Distortion factors
#
# The distortion factor beta is the normalized mean-square error of an optimal
# Gaussian quantizer. Below 6 bits it comes from a table; above that a
# closed-form approximation takes over.

# In[2]:

for b in range(1, 9):
    print(f"b={b}  beta={distortion_factor(b):.6g}  alpha={1 - distortion_factor(b):.6g}")

# The Lloyd-Max codebooks reproduce the tabulated values. The 1-bit codebook
# is the sign function scaled by sqrt(2/pi).

# In[3]:

for b in range(1, 6):
    cb = lloydmax_codebook(b)
    print(b, np.round(cb.levels[cb.levels > 0], 4), f"mse={cb.mse:.5f}")

# ## Empirical check on a million samples

# In[4]:

rng = np.random.default_rng(0)
x = rng.standard_normal(1_000_000)
for b in range(1, 6):
    q = lloydmax_codebook(b).quantize(x)
    print(b, f"{np.mean((x - q) ** 2):.5f}", distortion_factor(b))

# ## Linear model against the real quantizer
#
# The low-resolution block of the covariance predicted by the linear model
# should match the block measured after true quantization.

# In[5]:

geometry = ArrayGeometry(16)
scene = SourceScene.single(np.deg2rad(30), 1.0, 50_000)
x = synthesize_snapshots(geometry, scene, seed=1)
for b in (1, 2, 3):
    cfg = MixedAdcConfig(4, 12, b)
    R_true = sample_covariance(mixed_true_observe(x, geometry, scene, cfg)).data[4:, 4:]
    R_lin = sample_covariance(aqnm_observe(x, geometry, scene, cfg, seed=2)).data[4:, 4:]
    R_model = theoretical_covariance(geometry, scene, cfg).data[4:, 4:]
    rel = lambda A: np.linalg.norm(A - R_model) / np.linalg.norm(R_model)
    print(f"b={b}: true quantizer {rel(R_true):.3%}, linear model {rel(R_lin):.3%} from the prediction")

# A 1-bit converter only keeps the sign, so its output has constant modulus.

# In[6]:

y = quantize_true(x.data[:1, :5], MixedAdcConfig(0, 1, 1), scene.element_power)
print(np.round(y.data, 3))
