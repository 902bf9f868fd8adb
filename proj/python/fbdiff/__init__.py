"""Forward-backward diffusion denoiser for multiplicative Gamma noise.

Thin wrapper over the compiled extension. All heavy lifting happens in C++;
arrays cross the boundary as float64 numpy arrays (2D images, or 1D signals
where noted).
"""

try:
    from fbdiff._core import *  # noqa: F401,F403
    from fbdiff._core import __version__  # noqa: F401
except ImportError:  # running against a build tree, extension not in the package
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401

__all__ = [
    "potential_psi",
    "scalar_flux",
    "flux_q",
    "scalar_flux_min_slope",
    "minmod",
    "ConvexEnvelope",
    "build_envelope",
    "verify_structure",
    "gaussian_kernel",
    "convolve",
    "gray_indicator",
    "gamma_noise_field",
    "apply_multiplicative",
    "psnr",
    "mae",
    "make_synthetic",
    "denoise",
    "rothe_fixed_point",
    "read_pgm",
    "write_pgm",
]
