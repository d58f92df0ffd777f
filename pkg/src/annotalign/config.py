"""Pipeline settings, loadable from an INI file.

Example::

    [scoring]
    target_score = 100
    gap_penalty = 2
    combine = sum
    type_scores = lookup:2, number:1

    [corpus]
    labels = PER, ORG, LOC
    window = sentence

    [keys]
    token = root, string, category
    bare = number

    [refine]
    threshold = 0.95
    min_support = 3

    [priors]
    enabled = yes
    hi = 0.9
    lo = 0.1
    min_count = 2

    [apply]
    max_iterations = 10
    propagate_persons = yes
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from annotalign.align import ScoringConfig
from annotalign.annotations import DEFAULT_POLICY, KeyPolicy
from annotalign.engine import MAX_ITERATIONS
from annotalign.generate import MAX_PAIRS
from annotalign.refine import MIN_SUPPORT, PRIOR_HI, PRIOR_LO, PRIOR_MIN_COUNT, THRESHOLD


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    policy: KeyPolicy = DEFAULT_POLICY
    labels: tuple[str, ...] = ("PER", "ORG", "LOC")
    window: int | None = None
    threshold: float = THRESHOLD
    min_support: int = MIN_SUPPORT
    max_pairs: int = MAX_PAIRS
    seed: int = 0
    jobs: int = 1
    priors: bool = True
    prior_hi: float = PRIOR_HI
    prior_lo: float = PRIOR_LO
    prior_min_count: int = PRIOR_MIN_COUNT
    max_iterations: int = MAX_ITERATIONS
    person_label: str = "PER"
    propagate_persons: bool = True

    @property
    def label_policy(self) -> KeyPolicy:
        return self.policy.with_labels(self.labels)


def _list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def load_config(path) -> PipelineConfig:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> PipelineConfig:
    cfg = PipelineConfig()
    where = ""
    try:
        if parser.has_section("scoring"):
            where, sec = "scoring", parser["scoring"]
            scoring = {}
            for name in ("match_score", "mismatch_score", "gap_penalty", "target_score"):
                if name in sec:
                    scoring[name] = sec.getfloat(name)
            if "combine" in sec:
                scoring["combine"] = sec["combine"].strip().lower()
            if "type_scores" in sec:
                pairs = (item.split(":") for item in _list(sec["type_scores"]))
                scoring["type_scores"] = {k.strip().lower(): float(v) for k, v in pairs}
            cfg = replace(cfg, scoring=replace(cfg.scoring, **scoring))
        if parser.has_section("corpus"):
            where, sec = "corpus", parser["corpus"]
            if "labels" in sec:
                cfg = replace(cfg, labels=tuple(_list(sec["labels"])))
            if "window" in sec:
                w = sec["window"].strip().lower()
                cfg = replace(cfg, window=None if w == "sentence" else int(w))
        if parser.has_section("keys"):
            where, sec = "keys", parser["keys"]
            features = dict(cfg.policy.features)
            bare = cfg.policy.bare
            for name, value in sec.items():
                if name == "bare":
                    bare = frozenset(t.lower() for t in _list(value))
                else:
                    features[name.lower()] = tuple(f.lower() for f in _list(value))
            cfg = replace(cfg, policy=KeyPolicy(features, bare))
        if parser.has_section("refine"):
            where, sec = "refine", parser["refine"]
            updates = {}
            for name, conv in (
                ("threshold", sec.getfloat),
                ("min_support", sec.getint),
                ("max_pairs", sec.getint),
                ("seed", sec.getint),
                ("jobs", sec.getint),
            ):
                if name in sec:
                    updates[name] = conv(name)
            cfg = replace(cfg, **updates)
        if parser.has_section("priors"):
            where, sec = "priors", parser["priors"]
            updates = {}
            if "enabled" in sec:
                updates["priors"] = sec.getboolean("enabled")
            for name, attr, conv in (
                ("hi", "prior_hi", sec.getfloat),
                ("lo", "prior_lo", sec.getfloat),
                ("min_count", "prior_min_count", sec.getint),
            ):
                if name in sec:
                    updates[attr] = conv(name)
            cfg = replace(cfg, **updates)
        if parser.has_section("apply"):
            where, sec = "apply", parser["apply"]
            updates = {}
            if "max_iterations" in sec:
                updates["max_iterations"] = sec.getint("max_iterations")
            if "person_label" in sec:
                updates["person_label"] = sec["person_label"].strip()
            if "propagate_persons" in sec:
                updates["propagate_persons"] = sec.getboolean("propagate_persons")
            cfg = replace(cfg, **updates)
    except ValueError as exc:
        raise ConfigError(f"[{where}] {exc}") from exc
    if not cfg.prior_hi > cfg.prior_lo:
        raise ConfigError("priors: hi must exceed lo")
    if not 0.0 <= cfg.threshold <= 1.0:
        raise ConfigError("refine: threshold must lie in [0, 1]")
    return cfg
