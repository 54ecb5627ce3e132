"""
decolab: decorated Mandelbrot sets at desk scale.

High-precision solvers for special parameters of z -> z^2 + c, Böttcher
coordinates and their inverses, decorated model clouds, deep-zoom
rendering and similarity checks between models and rendered sets.
"""
__version__ = "0.1.0"

from .errors import ConvergenceError, DecolabError, DegenerateError, DomainError
from .hp import HPComplex, hp, parse_complex
from .dynamics import CycleRecord, OrbitRecord, find_cycle, iterate
from .solvers import (CascadeRecord, MisiurewiczSpec, ParabolicSpec, atom_size, cascade,
                      find_center_near, multiplier_at_misiurewicz, solve_misiurewicz,
                      solve_parabolic_root, solve_superattracting_center,
                      tune_misiurewicz, winding_number)
from .bottcher import (PotentialValue, green_K, green_M, inverse_phi_c, inverse_phi_M,
                       phi_c, phi_M)
from .models import (ModelSpec, PointCloud, build_model_K, build_model_M,
                     build_nested_model, gamma_m, rescale_gamma0, sample_julia)
from .render import (FrameSpec, Image, ZoomSchedule, overlay, render, render_auto,
                     render_deep, zoom_sequence)
from .verify import (VerificationReport, align_similarity, classify_decoration_level,
                     decoration_similarity, extract_boundary, hausdorff, model_boundary,
                     semihyperbolic_test)

tune = tune_misiurewicz
