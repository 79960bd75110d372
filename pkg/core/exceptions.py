"""
Lab Exceptions - Error hierarchy shared by services, experiments and the CLI
"""


class LabError(Exception):
    """Base exception for the lab"""
    exit_code = 1


class UsageError(LabError):
    """Malformed input: flags, parameters, files"""
    exit_code = 1


class InfeasibleError(LabError):
    """Well-formed request that cannot be carried out"""
    exit_code = 2


class SelftestFailure(LabError):
    """A built-in self-test suite found violations"""
    exit_code = 1


class SummarySchemaError(LabError):
    """Campaign summary does not match its JSON schema"""
    exit_code = 1


# =============================================================================
# Usage errors
# =============================================================================

class InvalidRegion(UsageError):
    """Region with non-positive area or inconsistent bounds"""
    pass


class InvalidParameter(UsageError):
    """Parameter outside its valid range"""
    pass


class CoordinateCollision(UsageError):
    """Two field points share a horizontal or vertical coordinate"""
    pass


class FieldFormatError(UsageError):
    """Point field file or sidecar cannot be parsed"""
    pass


class EndpointMismatch(UsageError):
    """Chains cannot be concatenated"""
    pass


class UnknownCampaign(UsageError):
    """No archived campaign under the requested id or path"""
    pass


# =============================================================================
# Infeasibility errors
# =============================================================================

class IncomparableEndpoints(InfeasibleError):
    """Endpoints are not ordered by the dominance relation"""
    pass


class IncompatibleEndpoints(InfeasibleError):
    """Scaled endpoints admit no polymer at this scaling parameter"""
    pass


class RegionTooSmall(InfeasibleError):
    """Field region does not cover the requested endpoints"""
    pass


class EndpointOutsideRegion(InfeasibleError):
    """Endpoint lies outside the allowed region"""
    pass


class TooManyPoints(InfeasibleError):
    """Exhaustive search refused: too many points in the box"""
    pass


class InsufficientData(InfeasibleError):
    """Not enough usable data points for a fit or a distance"""
    pass


class InfeasibleCampaign(InfeasibleError):
    """Campaign refused before sampling (memory guard)"""
    pass
