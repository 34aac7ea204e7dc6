# coding: utf-8

# # MUSIC and root-MUSIC on mixed-ADC data
#
# Two equal-power sources at -45 and 30 degrees, a 32-element array, a quarter
# of the chains at high resolution. We compare the spectra for 1-bit, 2-bit
# and 12-bit low-resolution converters.

# In[1]:

import numpy as np

from mixadc_doa import ArrayGeometry, MixedAdcConfig, SourceScene, decompose, root_music, sample_covariance
from mixadc_doa.estimators import default_grid, find_peaks, music_spectrum, spectrum_db
from mixadc_doa.harness import observe

geometry = ArrayGeometry(32)
scene = SourceScene((np.deg2rad(-45), np.deg2rad(30)), 10.0, 32)
grid = default_grid(0.05)

# In[2]:

spectra = {}
for b in (1, 2, 12):
    cfg = MixedAdcConfig.from_kappa(32, 0.25, b)
    y = observe(geometry, scene, cfg, seed=7, path="true-quantizer")
    dec = decompose(sample_covariance(y), 2)
    spectra[b] = music_spectrum(dec, geometry, grid)
    peaks = find_peaks(spectra[b], grid, 2).angles_deg
    print(f"b={b:<2} peaks {np.round(peaks, 3)}  root-MUSIC {np.round(root_music(dec, geometry).angles_deg, 3)}")

# Coarser converters lift the noise floor of the estimated noise subspace, so
# the peaks come out lower even though they sit at the same angles.

# In[3]:

for b, s in spectra.items():
    at = [s[np.argmin(np.abs(np.rad2deg(grid) - t))] for t in (-45, 30)]
    print(f"b={b:<2} peak heights {np.round(10 * np.log10(at), 1)} dB")

# In[4]:

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    for b, s in spectra.items():
        plt.plot(np.rad2deg(grid), spectrum_db(s), label=f"b={b}")
    plt.xlabel("angle (deg)")
    plt.ylabel("normalized spectrum (dB)")
    plt.legend()
    plt.savefig("music_spectra.png", dpi=120)
