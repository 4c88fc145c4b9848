"""Selection of the kernel backend (compiled extension or numpy fallback).

The choice is made at import from ``ARTIFACT_BACKEND``:

``auto`` (default)
    use the compiled extension when it imports, else the numpy fallback.
``cython``
    require the compiled extension.
``python``
    force the numpy fallback.

Public modules access kernels through :data:`core` at call time, so
:func:`use_backend` switches the implementation for the whole library.
"""
import os

from . import _pycore

core = _pycore
name = "python"


def _load(choice):
    global core, name
    choice = choice.lower()
    if choice not in ("auto", "cython", "python"):
        raise ValueError(f"unknown backend {choice!r}")
    if choice == "python":
        core, name = _pycore, "python"
        return name
    try:
        from . import _ccore
    except ImportError:
        if choice == "cython":
            raise
        core, name = _pycore, "python"
    else:
        core, name = _ccore, "cython"
    return name


def use_backend(choice):
    """Switch backend at runtime; returns the name actually selected."""
    return _load(choice)


def available():
    """Names of the importable backends."""
    names = ["python"]
    try:
        from . import _ccore  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


_load(os.environ.get("ARTIFACT_BACKEND", "auto"))
