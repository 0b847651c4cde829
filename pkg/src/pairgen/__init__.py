"""Design and evaluation of a seeded third-order photon-pair source in silica microfiber.

Modules
-------
material  Sellmeier dispersion of the core glass
modes     exact vector step-index modes, dispersion and phasematching
coupling  effective coupling area and nonlinear parameters
jsa       joint spectral amplitude, pair probability, Schmidt number
raman     spontaneous Raman noise and the signal-to-noise figure of merit
cli       ``pairgen`` command-line front end
"""

__version__ = "0.1.0"
