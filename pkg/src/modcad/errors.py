"""Exception hierarchy.

Every error a caller can provoke with bad input derives from
:class:`ModcadError`; the CLI maps those to exit code 1.  Broken internal
invariants raise :class:`InvariantFailure` instead (exit code 2).
"""


class ModcadError(Exception):
    """Base class for user-facing errors."""


class InvariantFailure(Exception):
    """An engine invariant did not hold after an operation."""


# -- module types and drawings ------------------------------------------------

class DuplicateType(ModcadError):
    pass


class DuplicatePropertyKey(ModcadError):
    pass


class UnknownType(ModcadError):
    pass


class PropertyError(ModcadError):
    """A module property key is not allowed for its type, or has the wrong kind."""


class ReplaceTargetMissing(ModcadError):
    pass


class EmptyResult(ModcadError):
    pass


class DuplicateElementId(ModcadError):
    pass


class ElementNotFound(ModcadError):
    pass


class DrawingFormatError(ModcadError):
    pass


# -- parametric representation ------------------------------------------------

class InvalidSchema(ModcadError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid schema: " + "; ".join(self.violations))


class UnknownList(ModcadError):
    pass


class FieldMismatch(ModcadError):
    pass


class BrokenRef(ModcadError):
    pass


class IndexOutOfRange(ModcadError):
    pass


class UseAfterRelease(ModcadError):
    pass


class SpeedVarsMissing(ModcadError):
    pass


# -- codec and catalog --------------------------------------------------------

class ValueOutOfRange(ModcadError):
    pass


class CodecError(ModcadError):
    """Base for everything the decoder can reject."""


class BadMagic(CodecError):
    pass


class SchemaMismatch(CodecError):
    pass


class CorruptPayload(CodecError):
    pass


class NameCollision(ModcadError):
    pass


class NotFound(ModcadError):
    pass


# -- extensions ---------------------------------------------------------------

class DuplicateExtension(ModcadError):
    pass


class UnknownExtension(ModcadError):
    pass


class UnknownCommand(ModcadError):
    pass


class CommandError(ModcadError):
    """Malformed command arguments."""


class ExtensionMismatch(ModcadError):
    pass


class DegeneratePolyline(ModcadError):
    pass


class BreakNotAllowed(ModcadError):
    def __init__(self, pipes):
        self.pipes = sorted(pipes)
        super().__init__(f"break plane crosses non-normal pipes {self.pipes}")


class InconsistentMass(ModcadError):
    def __init__(self, designation):
        self.designation = designation
        super().__init__(f"inconsistent unit mass for {designation!r}")


class UnreadableSource(ModcadError):
    def __init__(self, path, reason=""):
        self.path = path
        super().__init__(f"cannot read source drawing {path}: {reason}".rstrip(": "))


class ScriptError(ModcadError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")
