"""Exception types shared across the package."""


class OscnError(Exception):
    """Base class for all oscn errors."""


class ConfigError(OscnError):
    """Invalid configuration value (bad k, bad threshold, ...)."""


class UnsupportedLanguageError(OscnError):
    """The file's extension maps to no supported language."""


class SignatureMismatchError(OscnError):
    """Two signatures were built with different hash families."""


class DuplicateComponentError(OscnError):
    """A component with this name already exists in the database."""


class IngestError(OscnError):
    """The component root could not be read at all."""


class FormatError(OscnError):
    """The database file has an unknown magic or version."""


class IntegrityError(OscnError):
    """The database file is truncated or fails its checksum."""
