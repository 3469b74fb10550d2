"""Compression-based mining of sequential rules ``X -> Y`` from event sequences."""
from .core import (Rule, RuleIndex, RuleSet, RuleStats, RuleWindow, SearchParams, SequenceDatabase,
                   UsageError, best_rule_windows, minimal_windows, next_best_window, rule_stats,
                   trigger_count)
from .codec import (CodeStreams, CorruptStream, data_length, decode, model_length,
                    prequential_length, serialize_streams, total_score, universal_int)
from .cover import Cover, cover
from .candgen import Candidate, cand_rules, significance_test
from .miner import MiningResult, Scorer, mine_from_patterns, mine_rules, prune
from .synth import GenConfig, GroundTruth, generate
from .evaluation import f1, precision, recall, rule_sim

__version__ = "0.1.0"

__all__ = [
    "Rule", "RuleIndex", "RuleSet", "RuleStats", "RuleWindow", "SearchParams", "SequenceDatabase",
    "UsageError", "best_rule_windows", "minimal_windows", "next_best_window", "rule_stats",
    "trigger_count", "CodeStreams", "CorruptStream", "data_length", "decode", "model_length",
    "prequential_length", "serialize_streams", "total_score", "universal_int", "Cover", "cover",
    "Candidate", "cand_rules", "significance_test", "MiningResult", "Scorer", "mine_from_patterns",
    "mine_rules", "prune", "GenConfig", "GroundTruth", "generate", "f1", "precision", "recall",
    "rule_sim",
]
