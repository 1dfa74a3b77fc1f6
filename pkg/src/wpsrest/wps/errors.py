"""Exceptions raised by the WPS codecs."""


class WPSProtocolError(Exception):
    """Base class for every codec failure."""


class InvariantViolation(WPSProtocolError, ValueError):
    """A model was constructed with values that break its invariants."""


class UnencodableRequest(WPSProtocolError):
    """The request cannot be expressed in the chosen binding."""


class MissingParameter(WPSProtocolError):
    def __init__(self, name: str):
        super().__init__(f"missing required parameter: {name}")
        self.name = name


class UnknownOperation(WPSProtocolError):
    def __init__(self, value: str):
        super().__init__(f"unknown operation: {value!r}")
        self.value = value


class MalformedDocument(WPSProtocolError):
    """Bytes are not a well-formed XML document."""


class SchemaViolation(WPSProtocolError):
    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail
