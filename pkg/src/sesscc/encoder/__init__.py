"""Translation of HVK/HVK+ programs into utcc processes."""

from .encode import (
    EncodingContext,
    EncodingError,
    call_predicate,
    encode,
    encode_program,
    encode_recursion,
    encode_timed,
)
from .guard import guard_process
