"""Kuranishi charts, deformation complexes, zero sets and orbit-type strata."""

from .gauge import CellComplex, rose_torus, wedge_sphere
from .kuranishi import (
    DeformationComplex,
    KuranishiChart,
    deformation_complex,
    kuranishi_chart,
    virtual_dimension,
)
from .stratify import (
    StratificationReport,
    Stratum,
    label_points,
    local_dimensions,
    stratify,
)
from .zeroset import ZeroSet, explore_zero_set

__all__ = [
    "CellComplex",
    "DeformationComplex",
    "KuranishiChart",
    "StratificationReport",
    "Stratum",
    "ZeroSet",
    "deformation_complex",
    "explore_zero_set",
    "kuranishi_chart",
    "label_points",
    "local_dimensions",
    "rose_torus",
    "stratify",
    "virtual_dimension",
    "wedge_sphere",
]
