"""Exception types raised across the package, one class per failure mode."""


class DfplaceError(Exception):
    """Base class for all errors raised by this package."""


class MalformedDocument(DfplaceError):
    """Input document is structurally invalid (bad field, wrong type, ...)."""


class MissingInstances(DfplaceError):
    """Netlist declares no instances."""


class DanglingPin(DfplaceError):
    """A net references an instance or pin that does not exist."""


class DuplicateName(DfplaceError):
    """Two instances (or masters) share the same name."""


class BadOutline(DfplaceError):
    """Placement outline has a non-positive width or height."""


class UnsupportedConstruct(DfplaceError):
    """Verilog source uses a construct outside the structural subset."""


class UnknownMaster(DfplaceError):
    """An instantiated module has no geometry definition."""


class ThresholdConflict(DfplaceError):
    """Clustering thresholds are inconsistent (min >= max)."""


class DegenerateCluster(DfplaceError):
    """Cluster has zero area or zero instance count where positive is required."""


class EmptyGraph(DfplaceError):
    """No clusters available for placement."""


class BadPermutation(DfplaceError):
    """Sequence-pair halves are not permutations of the same index set."""


class UnplacedCluster(DfplaceError):
    """An edge references a cluster that has no position in the floorplan."""


class EmptyCluster(DfplaceError):
    """Geometric center requested for a cluster with no placed members."""


class EmptyPointSet(DfplaceError):
    """HPWL requested for an empty point set."""


class ConfigError(DfplaceError):
    """Pipeline configuration is invalid (unknown key, bad value)."""


class PipelineStageError(DfplaceError):
    """Wraps an error raised inside a pipeline stage with stage context."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
