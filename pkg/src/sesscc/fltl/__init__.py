"""Temporal formulas extracted from utcc processes and bounded trace checking."""

from .checking import (
    MalformedTemplate,
    Template,
    Verdict,
    acceptance_counter,
    check_eventually,
    check_template,
    read_templates,
    verify,
)
from .extract import extract, guarantees_eventually
from .formula import format_formula
