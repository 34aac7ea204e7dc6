# coding: utf-8

# # Energy efficiency against converter resolution
#
# Efficiency is the inverse root bound (in degrees) per watt of receiver power.
# More bits buy accuracy, but converter power grows exponentially with b.

# In[1]:

import math

from mixadc_doa import ArrayGeometry, PowerModel, SourceScene, adc_power, optimal_bits, total_power
from mixadc_doa.energy import ee_curve
from mixadc_doa.quantizer import MixedAdcConfig

model = PowerModel()
geometry = ArrayGeometry(128)
scene = SourceScene.single(math.radians(30), 1.0, 32)

# In[2]:

for b in (1, 2, 4, 8, 12):
    print(f"one {b}-bit ADC: {1e3 * adc_power(model, b):8.3f} mW")

# In[3]:

rep = total_power(model, MixedAdcConfig.from_kappa(128, 0.25, 2), geometry)
for k, v in rep.p_breakdown.items():
    print(f"{k:<12}{v:9.4f} W")
print(f"{'total':<12}{rep.p_total:9.4f} W")

# ## Efficiency curves

# In[4]:

for kappa in (1 / 8, 1 / 4, 1 / 2):
    curve = ee_curve(geometry, scene, kappa, range(1, 13), model)
    print(f"kappa={kappa:<6g}" + " ".join(f"{curve[b].ee:6.3f}" for b in range(1, 13)))
    print(f"  best b = {optimal_bits(geometry, scene, model, kappa, range(1, 13))}")

# Fewer high-resolution chains raise the efficiency, but an array with none at
# all pays for it in accuracy.

# In[5]:

pure = ee_curve(geometry, scene, 0.0, [2], model)[2]
print(f"pure low-resolution: ee={pure.ee:.3f}, std={math.sqrt(pure.crlb_deg2):.4f} deg, flagged={pure.pure_low_resolution}")
