"""Backend selection for the hot summation kernels.

The compiled extension is preferred when it imported cleanly; otherwise the
numpy implementation is used.  Both expose the same functions, and
``cavdd._kernels_np`` stays importable directly for benchmarking and
cross-checks.
"""

from . import _kernels_np

try:
    from . import _kernels as _impl  # compiled extension

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    _impl = _kernels_np
    BACKEND = "numpy"

image_sum = _impl.image_sum
mode_sum = _impl.mode_sum
screened_kernel = _kernels_np.screened_kernel
