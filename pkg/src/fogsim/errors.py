"""Exception types shared across the package.

Every error raised by the library derives from FogsimError so callers can
catch domain failures without masking programming errors.
"""


class FogsimError(Exception):
    """Base class for all library errors."""


# topology
class MissingCloudAgent(FogsimError):
    """The node set does not contain exactly one root cloud agent."""


class CycleDetected(FogsimError):
    """Parent references do not form a tree rooted at the cloud agent."""


class MicroagentWithChildren(FogsimError):
    """A microagent was given children; microagents are always leaves."""


class InvalidCapacity(FogsimError):
    """A capacity, service rate, or link latency is out of range."""


class EmptyCluster(FogsimError):
    """Leader election was attempted on an empty member list."""


class ParentIsMicroagent(FogsimError):
    """A node was attached under a microagent."""


class UnknownParent(FogsimError):
    """A node references a parent that does not exist."""


class UnknownNode(FogsimError):
    """A node id does not exist in the topology."""


class DuplicateNode(FogsimError):
    """A node id was used more than once."""


class CannotRemoveRoot(FogsimError):
    """The cloud agent cannot be removed."""


# placement
class DoubleRelease(FogsimError):
    """A placement decision was released twice."""


class UnknownTarget(FogsimError):
    """The release target no longer exists in the topology."""


# qos
class NoCandidates(FogsimError):
    """Dispatch was called with an empty candidate set."""


# positioning
class NoObservations(FogsimError):
    """No signal observations were supplied."""


class InsufficientObservations(FogsimError):
    """Fewer than three distinct access points were observed."""


class DegenerateGeometry(FogsimError):
    """The observed access points are collinear; the fix is unsolvable."""


# analytics
class OutOfBounds(FogsimError):
    """A position falls outside the heat map grid."""


# simnet / workload / harness
class ScenarioOverflow(FogsimError):
    """The event queue exceeded its configured bound."""


class InvalidParams(FogsimError):
    """Scenario or workload parameters are inconsistent."""


class SweepMismatch(FogsimError):
    """Two experiment results cover different rate sweeps."""
