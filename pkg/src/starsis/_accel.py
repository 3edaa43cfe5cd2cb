"""Backend switch for the compiled kernels.

numba is optional. When it is importable the compiled loops are used unless
``STARSIS_DISABLE_NUMBA`` is set to a truthy value, in which case every
kernel falls back to its numpy implementation.
"""
import os

DISABLE_ENV = "STARSIS_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - depends on environment
    numba = None

HAVE_NUMBA = numba is not None


def numba_disabled_by_env(environ=os.environ):
    return environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not numba_disabled_by_env()


def njit(func):
    # no cache: kernels are closures, which numba cannot cache to disk
    return numba.njit(func)


def identity(func):
    return func
