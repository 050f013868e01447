"""Wave packet transform, modulation-space norms and magnetic Schrodinger propagation."""
from .grid import Field, UniformGrid, fourier_forward, fourier_inverse, make_grid
from .potentials import PotentialModel, check_assumption
from .propagator import free_propagate, magnetic_propagate
from .wavepacket import PhaseSpaceField, iwpt, mod_norm, modulation_norm, wpt
from .windows import WindowSpec, evolve_window, gaussian_window, make_window

__version__ = "0.1.0"
