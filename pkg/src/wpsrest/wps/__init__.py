"""WPS 1.0.0 document model and its KVP and XML/POST codecs."""

from wpsrest.wps.errors import (
    InvariantViolation,
    MalformedDocument,
    MissingParameter,
    SchemaViolation,
    UnencodableRequest,
    UnknownOperation,
    WPSProtocolError,
)
from wpsrest.wps.kvp import encode_kvp, parse_kvp
from wpsrest.wps.models import (
    BBoxValue,
    ComplexValue,
    DataValue,
    DescribeProcess,
    ExceptionEntry,
    ExceptionReport,
    Execute,
    ExecuteResult,
    GetCapabilities,
    InputDescriptor,
    LiteralValue,
    OperationRequest,
    OutputDescriptor,
    ProcessBrief,
    ProcessDescription,
    ServiceCapabilities,
)
from wpsrest.wps.xmlcodec import (
    WPS_NS,
    encode_capabilities,
    encode_exception_report,
    encode_execute_response,
    encode_process_description,
    encode_process_descriptions,
    encode_xml,
    parse_capabilities,
    parse_exception_report,
    parse_execute_response,
    parse_process_description,
    parse_process_descriptions,
    parse_xml,
)

__all__ = [
    "BBoxValue",
    "ComplexValue",
    "DataValue",
    "DescribeProcess",
    "ExceptionEntry",
    "ExceptionReport",
    "Execute",
    "ExecuteResult",
    "GetCapabilities",
    "InputDescriptor",
    "InvariantViolation",
    "LiteralValue",
    "MalformedDocument",
    "MissingParameter",
    "OperationRequest",
    "OutputDescriptor",
    "ProcessBrief",
    "ProcessDescription",
    "SchemaViolation",
    "ServiceCapabilities",
    "UnencodableRequest",
    "UnknownOperation",
    "WPSProtocolError",
    "WPS_NS",
    "encode_capabilities",
    "encode_exception_report",
    "encode_execute_response",
    "encode_kvp",
    "encode_process_description",
    "encode_process_descriptions",
    "encode_xml",
    "parse_capabilities",
    "parse_exception_report",
    "parse_execute_response",
    "parse_kvp",
    "parse_process_description",
    "parse_process_descriptions",
    "parse_xml",
]
