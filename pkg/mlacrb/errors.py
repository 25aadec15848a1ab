# mlacrb/errors.py: the exception hierarchy
#
# Everything raised on purpose by mlacrb derives from Error, mirroring the
# DB-API layout where a single base class lets callers catch the whole
# family while the subclasses keep the standard library bases that fit.


class Error(Exception):
    """Base class of all mlacrb errors."""


class Warning(Exception):
    """Base class of all mlacrb warnings."""


class ConfigError(Error):
    """An experiment configuration could not be parsed or validated."""

    def __init__(self, message, section=None, key=None, lineno=None):
        self.section = section
        self.key = key
        self.lineno = lineno
        self.message = message
        where = []
        if lineno is not None:
            where.append("line %d" % lineno)
        if section is not None:
            where.append("[%s]" % section)
        if key is not None:
            where.append(key)
        if where:
            message = "%s: %s" % (" ".join(where), message)
        super().__init__(message)


class DomainError(Error, ValueError):
    """An argument lies outside the domain of the operation."""


class UnobservableError(DomainError):
    """The transverse velocity carries no Fisher information."""


class SingularityError(Error, ArithmeticError):
    """The Fisher information matrix is singular, so no bound exists."""


class InfeasibleDesignError(Error, ValueError):
    """No modular design matches the reference array under the constraints."""


class ApproximationWarning(Warning, UserWarning):
    """A closed-form approximation is used outside its validity region."""
