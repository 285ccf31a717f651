"""Exception types shared across the package."""


class AcaError(Exception):
    """Base class for all errors raised by this package's contracts."""


class IngestError(AcaError):
    """Fatal ingest problem: unreadable input, missing header columns, empty file."""


class LibraryError(AcaError):
    """Base class for threat-library problems."""


class LibraryFormatError(LibraryError):
    """Library file violates the schema; message names the offending field."""


class LibraryVersionError(LibraryError):
    """Refused write that would regress a persisted library version."""


class UnknownEntryError(LibraryError, KeyError):
    """An update or mapping referenced an entry id the library does not contain."""


class FilterError(AcaError, ValueError):
    """Ambiguous or invalid PHI filter specification."""


class RiskInputError(AcaError, ValueError):
    """Risk scoring preconditions violated (e.g. zero total incident weight)."""


class SimulationError(AcaError, ValueError):
    """Invalid simulation parameters or empty rule/pattern inputs."""


class ProvenanceError(AcaError):
    """Artifacts from different runs were combined; provenance blocks disagree."""


class ArtifactError(AcaError):
    """A required run artifact is missing or unreadable; message names the file."""
