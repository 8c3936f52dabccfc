"""Lower bounds on C_d: see-saw optimizer, spectral evaluator and catalog."""
from .catalog import (
    CatalogEntry,
    CatalogError,
    SpectrumCatalog,
    known_dprime,
    kcbs_pentagram_tuple,
    shipped_catalog,
    tsirelson_tuple,
)
from .seesaw import CdResult, SeesawOptions, cd_seesaw
from .spectral import (
    EmptyCatalogError,
    cd_spectral,
    cdr,
    cdr_catalog,
    inequality_value,
    lift_spectrum,
    lift_tuple,
    prop1_bound,
    t_spectrum,
)

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "CdResult",
    "EmptyCatalogError",
    "SeesawOptions",
    "SpectrumCatalog",
    "cd_seesaw",
    "cd_spectral",
    "cdr",
    "cdr_catalog",
    "inequality_value",
    "kcbs_pentagram_tuple",
    "known_dprime",
    "lift_spectrum",
    "lift_tuple",
    "prop1_bound",
    "shipped_catalog",
    "t_spectrum",
    "tsirelson_tuple",
]
