"""JIT backend selection for the hot numeric kernels.

The interior-point kernel is compiled with numba by default. Setting the
environment variable ``LASSOZERO_JIT=0`` (before import) switches every
kernel to the plain numpy implementation, which runs the exact same code
path uncompiled; useful for debugging and for benchmarking the speedup.
"""

import os

JIT_ENABLED = os.environ.get("LASSOZERO_JIT", "1").strip().lower() not in (
    "0",
    "false",
    "off",
)

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(*args, **kwargs):  # noqa: ARG001 - mirror numba's signature
        if args and callable(args[0]):
            return args[0]

        def wrapper(func):
            return func

        return wrapper
