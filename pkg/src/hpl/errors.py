"""Common base for recoverable domain errors.

Every module-specific error derives from DomainError so callers (the CLI,
the HTTP service) can distinguish bad inputs from programming bugs.
"""


class DomainError(Exception):
    @property
    def code(self) -> str:
        return type(self).__name__
