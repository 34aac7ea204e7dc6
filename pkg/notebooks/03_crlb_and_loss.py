# coding: utf-8

# # Cramer-Rao bound and the cost of coarse converters
#
# The bound for the mixed array depends on three weighted position sums. The
# low-resolution chains enter with weight alpha / (beta * gamma + 1), so they
# count as fractional antennas.

# In[1]:

import math

import numpy as np

from mixadc_doa import (ArrayGeometry, MixedAdcConfig, SourceScene, crlb_appendix, fim, fim_intermediates,
                        fim_numeric, perf_loss, perf_loss_formula)
from mixadc_doa.crlb import perf_loss_limit
from mixadc_doa.quantizer import distortion_factor

geometry = ArrayGeometry(128)
scene = SourceScene.single(math.radians(30), 1.0, 32)
config = MixedAdcConfig.from_kappa(128, 0.25, 2)

# In[2]:

it = fim_intermediates(geometry, scene, config, self_check=True)
print(f"xi={it.xi:.3f}  mu={it.mu:.3f}  nu={it.nu:.3f}")
print(crlb_appendix(geometry, scene, config).summary())

# The closed form agrees with a brute-force finite-difference Fisher information.

# In[3]:

print(fim(geometry, scene, config), fim_numeric(geometry, scene, config))

# ## Performance loss
#
# The loss factor is the ratio of the mixed bound to the all-high-resolution
# bound. It falls monotonically as the high-resolution share kappa grows.

# In[4]:

kappas = np.linspace(0, 1, 11)
for b in (1, 2, 3, 4):
    row = [10 * math.log10(perf_loss_formula(k, 128, distortion_factor(b), 1.0)) for k in kappas]
    print(f"b={b}: " + " ".join(f"{v:5.2f}" for v in row))

# Large arrays approach a closed-form limit.

# In[5]:

for M in (32, 128, 1024, 8192):
    print(M, perf_loss_formula(0.25, M, distortion_factor(1), 1.0), perf_loss_limit(0.25, distortion_factor(1), 1.0))

# In[6]:

loss = perf_loss(geometry, scene, config)
print(f"quotient {loss.ratio:.12f}  formula {loss.ratio_formula:.12f}  ({loss.db:.3f} dB)")
