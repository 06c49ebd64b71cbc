"""Binary quadratic forms and class groups of quadratic fields."""

from .forms import (
    QuadForm,
    ReductionCycle,
    compose,
    compose_raw,
    cycle_of,
    enumerate_reduced_definite,
    enumerate_reduced_indefinite,
    inverse,
    is_reduced_definite,
    is_reduced_indefinite,
    pell_minus_solvable,
    principal_form,
    reduce_definite,
    reduce_form,
    reduce_indefinite,
    rho,
)
from .group import ClassGroupInfo, FormClassGroup, class_group, class_number, p_rank, r3, wide_p_rank
from .table import ClassGroupTable, default_table

__all__ = [
    "QuadForm",
    "ReductionCycle",
    "ClassGroupInfo",
    "FormClassGroup",
    "compose",
    "compose_raw",
    "cycle_of",
    "enumerate_reduced_definite",
    "enumerate_reduced_indefinite",
    "inverse",
    "is_reduced_definite",
    "is_reduced_indefinite",
    "pell_minus_solvable",
    "principal_form",
    "reduce_definite",
    "reduce_form",
    "reduce_indefinite",
    "rho",
    "class_group",
    "class_number",
    "p_rank",
    "r3",
    "wide_p_rank",
    "ClassGroupTable",
    "default_table",
]
