"""Exception types shared across the package.

The CLI maps these onto process exit codes: data problems exit 2,
artifact mismatches exit 3.
"""


class EpvkitError(Exception):
    """Base class for all epvkit errors."""


class DataFormatError(EpvkitError):
    """Malformed or inconsistent input data (bad CSV row, unknown
    category, conflicting possession outcomes, unknown team, ...)."""


class RegionError(EpvkitError, ValueError):
    """A pitch location outside the region a function accepts."""


class ArtifactError(EpvkitError):
    """A persisted artifact (posterior directory, surface grid) is
    corrupt or does not match what the operation expects."""


class GridMismatchError(ArtifactError):
    """Two surface grids that should align (resolution, row set) do not."""


class MleConvergenceError(EpvkitError):
    """Dirichlet maximum-likelihood fit failed to converge or its input
    was degenerate."""


class ConfigError(EpvkitError, ValueError):
    """Invalid sampler or run configuration."""
