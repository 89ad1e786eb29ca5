"""Exception hierarchy.

Every error raised by the library derives from :class:`PhotonShaperError` and
carries an ``exit_code`` used by the command-line front end.
"""


class PhotonShaperError(Exception):
    exit_code = 3
    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "type": type(self).__name__, "message": str(self)}


class ParameterError(PhotonShaperError, ValueError):
    kind = "parameter"


class DomainError(PhotonShaperError, ValueError):
    kind = "domain"


class CapacityError(PhotonShaperError):
    exit_code = 4
    kind = "capacity"


class RefinementError(PhotonShaperError):
    kind = "refinement"


class CoverageError(PhotonShaperError, ValueError):
    kind = "coverage"


class UndefinedShapeError(PhotonShaperError):
    kind = "undefined-shape"


class SingularCouplingError(PhotonShaperError):
    kind = "singular-coupling"


class UnphysicalTargetError(PhotonShaperError):
    kind = "unphysical-target"


class InfeasibleDesignError(PhotonShaperError):
    kind = "design-infeasible"


class ConfigError(PhotonShaperError):
    exit_code = 2
    kind = "config"

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line

    def to_dict(self):
        d = super().to_dict()
        if self.line is not None:
            d["line"] = self.line
        return d
