from .covering import EpsPartitionResult, compute_N, exact_N
from .packing import EpsPackingResult, compute_M
from .regions import RegionEvaluator
from .scan import (
    ScanRow,
    ScanTable,
    SpectrumRow,
    SpectrumTable,
    asymptotic_scan,
    eps_schedule,
    gamma_p,
    packing_spectrum,
    sandwich_check,
    spectrum_scan,
)

__all__ = [
    "EpsPartitionResult",
    "EpsPackingResult",
    "RegionEvaluator",
    "ScanRow",
    "ScanTable",
    "SpectrumRow",
    "SpectrumTable",
    "asymptotic_scan",
    "compute_M",
    "compute_N",
    "eps_schedule",
    "exact_N",
    "gamma_p",
    "packing_spectrum",
    "sandwich_check",
    "spectrum_scan",
]
