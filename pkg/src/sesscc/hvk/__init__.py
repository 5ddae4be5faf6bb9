"""HVK and HVK+: syntax, parsing and the reference reduction semantics."""

from .ast import (
    INACT,
    Accept,
    Branch,
    CallVar,
    Catch,
    Decl,
    DeclAccept,
    DefIn,
    Hide,
    HvkProcess,
    If,
    Inact,
    Kill,
    Par,
    Receive,
    Request,
    Select,
    Send,
    Throw,
    TimedRequest,
    hpar,
    is_timed,
)
from .parser import format_hvk, parse_hvk
from .semantics import (
    NonDeterminismError,
    Round,
    State,
    Stuck,
    eval_expr,
    find_redexes,
    lint,
    load,
    normal_form,
    outermost_run,
    reduce_step,
)
