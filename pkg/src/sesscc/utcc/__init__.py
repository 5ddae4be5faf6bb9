"""The utcc calculus: processes, the engine, traces and concrete syntax."""

from .congruence import congr_normalize
from .derived import expand_derived
from .engine import (
    Configuration,
    Engine,
    NonQuiescence,
    TimeUnitResult,
    future,
    observe,
    quiesce,
    run,
    step_internal,
)
from .process import (
    SKIP,
    Abs,
    Bang,
    BangN,
    Local,
    Next,
    Par,
    Process,
    PTell,
    Skip,
    Tell,
    Unless,
    Wait,
    WaitAck,
    par,
    when,
    whenever,
)
from .syntax import format_process, parse_utcc, parse_utcc_constraint
from .trace import Trace, obs_equiv, parse_trace, serialize
