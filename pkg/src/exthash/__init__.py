"""Desk-scale lab for external-memory hashing under exact I/O accounting."""

from .bootstrap import BootstrapTable, beta_from_epsilon, beta_from_exponent
from .binball import GameOutcome, GameSpec, exhaustive_removal, optimal_removal, play
from .chained import ChainedTable
from .device import BlockDevice, IoLedger, replay_charges
from .errors import (
    BlockCapacityError,
    DeviceError,
    DuplicateItemError,
    EmptyTableError,
    ExthashError,
    MemoryBudgetError,
    ParameterError,
)
from .logmethod import LogSeries
from .params import Params, bucket_index, ideal_hash, ideal_hash_array, workload

__version__ = "0.1.0"

__all__ = [
    "BlockCapacityError",
    "BlockDevice",
    "BootstrapTable",
    "ChainedTable",
    "DeviceError",
    "DuplicateItemError",
    "EmptyTableError",
    "ExthashError",
    "GameOutcome",
    "GameSpec",
    "IoLedger",
    "LogSeries",
    "MemoryBudgetError",
    "ParameterError",
    "Params",
    "beta_from_epsilon",
    "beta_from_exponent",
    "bucket_index",
    "exhaustive_removal",
    "ideal_hash",
    "ideal_hash_array",
    "optimal_removal",
    "play",
    "replay_charges",
    "workload",
]
