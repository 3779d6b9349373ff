class HardyTreeError(Exception):
    """Base class for every error raised by hardytree."""


class InvalidLocationError(HardyTreeError, ValueError):
    pass


class TreeStructureError(HardyTreeError, ValueError):
    pass


class WeightError(HardyTreeError, ValueError):
    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class InputError(HardyTreeError, ValueError):
    def __init__(self, message, field=None, line=None):
        location = []
        if field is not None:
            location.append("field '{}'".format(field))
        if line is not None:
            location.append("line {}".format(line))
        if location:
            message = "{} ({})".format(message, ", ".join(location))
        super().__init__(message)
        self.field = field
        self.line = line


class UnsupportedExponentError(HardyTreeError, ValueError):
    pass


class DomainError(HardyTreeError, ValueError):
    pass


class InfeasibleError(HardyTreeError, ValueError):
    pass


class ShapeError(HardyTreeError, ValueError):
    pass


class ConfigError(HardyTreeError, ValueError):
    pass


class PartitionError(HardyTreeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
