import numpy as np

# |value| above this counts as nonzero in supports, indicators and caches
NONZERO_TOL = 1e-10


def support(z, tol=NONZERO_TOL):
    return np.flatnonzero(np.abs(z) > tol)


def nonzero_mask(a, tol=NONZERO_TOL):
    return np.abs(a) > tol


def spectral_norm_sq(X):
    """Largest eigenvalue of X'X, i.e. the squared largest singular value."""
    if X.size == 0:
        return 0.0
    return float(np.linalg.norm(X, 2)) ** 2
