"""Variable-length randomness extractors for imperfect bit sources, with an
exact desk-scale oracle for their guarantees."""

from .bits import BitReader, BitSequence, BitWriter, EndOfStream
from .frontends import Frontend, ThresholdPlan, make_plan
from .hasher import ExtractorSpec, toeplitz_extract
from .models import BiasedCoin, IntervalCoin, MarkovSource, ProductSource, optimal_coin_model
from .oracle import Distribution, stat_distance, verify_pipeline
from .pipeline import BlockPlan, build_vlx, extract_seeded, extract_seedless

__version__ = "0.1.0"
