"""Exception hierarchy shared by every area of the auditor."""


class PluginAuditError(Exception):
    """Base for every error the auditor raises on purpose."""


class MalformedDocument(PluginAuditError):
    """Raised when a manifest or API description is not a parseable document.

    Args:
        reason (str): what the parser tripped on.
        source (str | None): URL or path of the document, if known.
    """
    def __init__(self, reason: str, source: str | None = None):
        self.reason = reason
        self.source = source
        super().__init__(self._build_message())

    def _build_message(self) -> str:
        base = f"Malformed document: {self.reason}"
        if self.source:
            return f"{base} (source={self.source})"
        return base


class MissingField(PluginAuditError):
    """Raised when a document lacks a field that makes it what it claims to be."""
    def __init__(self, field: str, source: str | None = None):
        self.field = field
        self.source = source
        super().__init__(self._build_message())

    def _build_message(self) -> str:
        base = f"Required field '{self.field}' is missing"
        if self.source:
            return f"{base} (source={self.source})"
        return base


class UnsupportedVersion(PluginAuditError):
    def __init__(self, version: str):
        self.version = version
        super().__init__(f"Unsupported API-description version '{version}' (expected 3.x)")


class InvalidUrl(PluginAuditError):
    def __init__(self, url: str, reason: str = "not an absolute http(s) URL"):
        self.url = url
        self.reason = reason
        super().__init__(f"Invalid URL {url!r}: {reason}")


class UnsatisfiableParameter(PluginAuditError):
    def __init__(self, name: str, schema_type: str):
        self.name = name
        self.schema_type = schema_type
        super().__init__(f"Cannot synthesize a value for parameter '{name}' of type '{schema_type}'")


class PreconditionViolation(PluginAuditError, ValueError):
    """Raised when an operation is called with arguments its contract excludes."""


class MissingSurface(PluginAuditError):
    def __init__(self, plugin_id: str):
        self.plugin_id = plugin_id
        super().__init__(f"Plugin '{plugin_id}' has no manifest or API surface to evaluate")


class EmptyDescription(PluginAuditError):
    def __init__(self):
        super().__init__("Cannot classify an empty description")


class UnsatisfiableSpec(PluginAuditError):
    def __init__(self, constraint: str):
        self.constraint = constraint
        super().__init__(f"Fixture spec cannot be satisfied: {constraint}")


class PortUnavailable(PluginAuditError):
    def __init__(self, port: int, cause: Exception | None = None):
        self.port = port
        self.cause = cause
        super().__init__(f"Port {port} is unavailable" + (f": {cause}" if cause else ""))


class MalformedSnapshot(PluginAuditError):
    def __init__(self, reason: str, line: int | None = None):
        self.reason = reason
        self.line = line
        super().__init__(self._build_message())

    def _build_message(self) -> str:
        if self.line is not None:
            return f"Malformed snapshot at line {self.line}: {self.reason}"
        return f"Malformed snapshot: {self.reason}"


class DuplicateId(PluginAuditError):
    def __init__(self, plugin_id: str):
        self.plugin_id = plugin_id
        super().__init__(f"Duplicate plugin_id '{plugin_id}' in snapshot")


class IncomparableRuns(PluginAuditError):
    def __init__(self, earlier_digest: str, later_digest: str):
        self.earlier_digest = earlier_digest
        self.later_digest = later_digest
        super().__init__(
            f"Runs were produced under different configs ({earlier_digest} vs {later_digest})"
        )


class TransportError(PluginAuditError):
    """No HTTP response was obtained (connect failure, timeout, dropped connection)."""
    def __init__(self, url: str, cause: Exception | None = None):
        self.url = url
        self.cause = cause
        self.timed_out = cause is not None and "timeout" in type(cause).__name__.lower()
        super().__init__(f"No response from {url}" + (f": {type(cause).__name__}" if cause else ""))
