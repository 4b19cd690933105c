"""Causal discovery for integer modular additive-noise models."""

from .discover import DiscoveryResult, InsufficientDataError, discover, find_parent, find_sink
from .freqtable import DataError, FrequencyTable
from .metrics import acc, ero
from .modcore import Distribution, ModValue, Modulus, c_period, is_balanced, mod_add, mod_sub
from .revcheck import lemma_reversible, oracle_reversible, theorem_reversible
from .simulate import CausalModel, sample, simulate

__version__ = "0.1.0"
