"""Exception hierarchy shared by all eslmc modules."""

from __future__ import annotations


class EslmcError(Exception):
    """Base class for every error raised by eslmc."""


# -- model validation -------------------------------------------------------

class ModelError(EslmcError):
    """A single violation found while validating a model document."""


class MalformedModel(ModelError):
    pass


class DuplicateTransition(ModelError):
    pass


class MissingEnabledTransition(ModelError):
    def __init__(self, state, joint_action):
        self.state = tuple(state)
        self.joint_action = tuple(joint_action)
        super().__init__(
            f"no transition for enabled joint action {self.joint_action} "
            f"at reachable state {self.state}"
        )


class DisabledTransition(ModelError):
    pass


class UnknownIdentifier(ModelError):
    pass


class EmptyProtocolEntry(ModelError):
    pass


class ModelValidationError(EslmcError):
    """Raised by validate_model; carries every violation that was found."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {type(v).__name__}: {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} model violation(s):\n{lines}")


# -- queries -----------------------------------------------------------------

class UnknownAgent(EslmcError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown agent {name!r}")


class NotEnabled(EslmcError):
    pass


# -- formulas ----------------------------------------------------------------

class FormulaSyntaxError(EslmcError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")


# -- strategies ----------------------------------------------------------------

class RecallZero(EslmcError):
    pass


class RecallMismatch(EslmcError):
    pass


class SearchSpaceExceeded(EslmcError):
    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"strategy space of size {size} exceeds cap {cap}")


# -- QPTL bridge -------------------------------------------------------------

class EmptyAP(EslmcError):
    pass


class UnknownProposition(EslmcError):
    pass


class BoundsExceeded(EslmcError):
    pass
