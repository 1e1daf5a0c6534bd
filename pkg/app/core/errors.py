class MatchLoomError(Exception):
    """Base class for every error raised by the engine."""


class ConfigError(MatchLoomError):
    """Point count is odd, zero or negative."""


class ChordError(MatchLoomError):
    """Chord index out of range or degenerate chord."""


class MatchingParseError(MatchLoomError):
    def __init__(self, message: str, position: int | None = None, invariant: str | None = None):
        self.position = position
        self.invariant = invariant
        where = f" at token {position}" if position is not None else ""
        tag = f" [{invariant}]" if invariant else ""
        super().__init__(f"{message}{where}{tag}")


class SemicycleError(MatchLoomError):
    """Edge set is not a valid semicycle of the matching."""


class ConstructionError(MatchLoomError):
    """A construction precondition failed or produced an invalid drawing."""


class SizeLimitError(MatchLoomError):
    def __init__(self, points: int, limit: int, what: str):
        self.points = points
        self.limit = limit
        super().__init__(f"{what} limited to {limit} points (got {points}); pass --unsafe-size to override")


class UnknownSuiteError(MatchLoomError):
    pass
