"""Exception types shared across the package."""


class SceneGenError(Exception):
    """Base class for all package errors."""


class ParseError(SceneGenError):
    """A data file could not be parsed. Carries the offending location."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class AssetNotFound(SceneGenError):
    """A clip-art image or other render asset is missing."""


class RetrievalMiss(SceneGenError):
    """No patch is available for the requested category."""


class NoNegativeAvailable(SceneGenError):
    """A category holds a single patch, so no negative can be drawn."""


class PlacementError(SceneGenError):
    """A patch placement degenerated to zero visible area."""


class RenderError(SceneGenError):
    """Rendering failed; the message names the missing asset or patch id."""


class TrainingDiverged(SceneGenError):
    """Loss became non-finite. Carries the path of the dumped batch."""

    def __init__(self, message, dump_path=None):
        super().__init__(message)
        self.dump_path = dump_path
