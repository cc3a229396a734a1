"""fusetrack: camera-RFID trajectory fusion toolkit.

Modules:
    core        frames, trajectories, validation
    gp          GP range/bearing regression and the model registry
    ekf         GP-variance-driven extended Kalman filtering
    align       temporal overlap and spline resampling
    similarity  discrete Frechet, uncertainty intervals, DTW/Euclidean
    assoc       Mahalanobis pair scoring and matching
    sim         Monte-Carlo association testbed
    stereo      semi-global matching and reprojection
    ingest      measurement log parsing and plot-data export
    pipeline    end-to-end association of ingested logs
    kernels     compiled/python hot-kernel backend selection
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
