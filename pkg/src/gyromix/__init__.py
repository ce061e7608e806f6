"""gyromix: contrastive metric learning across Euclidean and hyperbolic geometry.

Submodules
----------
geometry    Poincare-ball kernels (Mobius addition, distance, exponential map).
losses      Pairwise cross-entropy losses and triplet-weight extraction.
gradients   Hand-derived analytic gradients plus a finite-difference oracle.
training    Two-branch MLP encoder, batch sampler, optimizer loop, data IO.
evaluation  Recall@K, hard-negative rankings, weight profiles, sweep harness.
reports     CSV writers with fixed schemas and JSON metadata sidecars.
plots       Matplotlib figure rendering for every report type.
config      Run-configuration schema (YAML, unknown keys rejected).
cli         Command-line entry points: train/eval/analyze/sweep/gen-data.
"""

from importlib import import_module

__version__ = "0.1.0"

_SUBMODULES = (
    "geometry",
    "losses",
    "gradients",
    "training",
    "evaluation",
    "reports",
    "plots",
    "config",
    "cli",
)


def __getattr__(name):
    # Lazy imports keep `import gyromix` cheap and let the CLI cap BLAS
    # threads before numpy loads.
    if name in _SUBMODULES:
        return import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
