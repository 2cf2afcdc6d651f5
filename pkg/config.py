import os
from typing import Dict, Iterable, Optional, Tuple

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from models import SamplerConfig, SyntheticSpec, TokenizerConfig, WeightSequence

load_dotenv()

ENV_PREFIX = "CSATM_"


class Config:
    """Built-in defaults for every run setting (flat keys, as used in run-config files)"""

    DEFAULTS = {
        # Paths
        'input': None,
        'input_format': 'generic-jsonl',
        'reference': None,
        'truth': None,
        'output_dir': 'output',
        'model_dir': None,

        # Tokenizer
        'min_len': 2,
        'stopwords': None,
        'default_stopwords': False,
        'min_count': 1,

        # Popularity weights (arithmetic with a sharp fall-off suits sparse data)
        'weight_seq': 'arithmetic',
        'wc': 1.0,
        'wd': 0.25,
        'wr': 0.5,
        'wb': 1.0,
        'gravity': 1.0,
        'wfloor': 0.0,

        # Transitivity weights; unset keys fall back to the popularity weights
        'blend_weight_seq': None,
        'blend_wc': None,
        'blend_wd': None,
        'blend_wr': None,
        'blend_wb': None,
        'blend_gravity': None,

        # Sampler
        'topics': 70,
        'alpha': 0.1,
        'beta': 0.01,
        'lambda': 'auto',
        'iterations': 1000,
        'burn_in': 200,
        'sample_lag': 0,
        'seed': 42,
        'log_every': 100,
        'lda_baseline': False,
        'mode': 'corpus',
        'thread_topics': 3,
        'min_descendants': 0,

        # Evaluation
        'top_t': 10,
        'window_sizes': '5,10,70,110',

        # Synthetic benchmark
        'synth_threads': 20,
        'synth_comments': 100,
        'synth_topics': 4,
        'synth_vocab_per_topic': 30,
        'synth_noise_vocab': 40,
        'synth_noise_leaf_fraction': 0.3,
        'synth_topic_shift_prob': 0.1,
        'synth_noise_word_prob': 0.2,
        'synth_tokens_per_comment': 6.0,
        'synth_branching_p': 0.45,
        'synth_reference_docs': 2000,

        # Logging
        'log_level': 'INFO',
        'log_file': None,
        'progress': True,
    }

    @classmethod
    def from_environ(cls) -> Dict[str, str]:
        """CSATM_* environment overrides, keyed by flat setting name"""
        values = {}
        for key in cls.DEFAULTS:
            env_value = os.environ.get(ENV_PREFIX + key.upper())
            if env_value is not None:
                values[key] = env_value
        return values


def _normalize_key(key: str) -> str:
    key = key.strip().lower().replace('-', '_')
    if key.startswith(ENV_PREFIX.lower()):
        key = key[len(ENV_PREFIX):]
    return key


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    text = str(value).strip().lower()
    if text in ('true', '1', 'yes', 'on'):
        return True
    if text in ('false', '0', 'no', 'off', ''):
        return False
    raise ValueError(f"Expected a boolean value, got '{value}'")


def _blank(value) -> bool:
    return value is None or (isinstance(value, str) and value.strip() in ('', 'none', 'null'))


class RunConfig(BaseModel):
    """Fully validated settings for one CLI invocation"""

    model_config = ConfigDict(frozen=True)

    input_path: Optional[str] = None
    input_format: str = 'generic-jsonl'
    reference_path: Optional[str] = None
    truth_path: Optional[str] = None
    output_dir: str = 'output'
    model_dir: Optional[str] = None
    stopwords_path: Optional[str] = None

    tokenizer: TokenizerConfig = TokenizerConfig()
    min_count: int = Field(default=1, ge=1)
    weights: WeightSequence = WeightSequence()
    blend_weights: WeightSequence = WeightSequence()
    sampler: SamplerConfig = SamplerConfig()
    lda_baseline: bool = False
    mode: str = 'corpus'
    thread_topics: int = Field(default=3, ge=1)
    min_descendants: int = Field(default=0, ge=0)

    top_t: int = Field(default=10, ge=2)
    window_sizes: Tuple[int, ...] = (5, 10, 70, 110)

    synthetic: SyntheticSpec = SyntheticSpec()
    synth_reference_docs: int = Field(default=2000, ge=0)

    log_level: str = 'INFO'
    log_file: Optional[str] = None

    @field_validator('input_format')
    @classmethod
    def _check_format(cls, value):
        if value not in ('generic-jsonl', 'pushshift'):
            raise ValueError(f"input_format must be 'generic-jsonl' or 'pushshift', got '{value}'")
        return value

    @field_validator('mode')
    @classmethod
    def _check_mode(cls, value):
        if value not in ('corpus', 'thread'):
            raise ValueError(f"mode must be 'corpus' or 'thread', got '{value}'")
        return value

    @field_validator('window_sizes')
    @classmethod
    def _check_windows(cls, value):
        required = {5, 10, 70, 110}
        if not required.issubset(value):
            raise ValueError(f"window_sizes must include {sorted(required)}, got {list(value)}")
        return tuple(sorted(set(value)))

    @property
    def resolved_model_dir(self) -> str:
        return self.model_dir or os.path.join(self.output_dir, 'model')

    def require_paths(self, *names: str):
        """Fail fast on missing input files named by attribute."""
        for name in names:
            path = getattr(self, name)
            if not path:
                raise ValueError(f"Missing required setting '{name}'")
            if not os.path.exists(path):
                raise FileNotFoundError(f"Input path does not exist: {path}")


def _weight_sequence(values: Dict, prefix: str = '', fallback: Optional[Dict] = None) -> WeightSequence:
    fallback = fallback or {}

    def pick(key):
        value = values.get(prefix + key)
        if _blank(value):
            return fallback.get(key)
        return value

    params = {
        'variant': pick('weight_seq'),
        'c': pick('wc'),
        'd': pick('wd'),
        'r': pick('wr'),
        'b': pick('wb'),
        'G': pick('gravity'),
        'floor': pick('wfloor'),
    }
    return WeightSequence(**{k: v for k, v in params.items() if not _blank(v)})


def build_run_config(values: Dict) -> RunConfig:
    """Validate a flat settings mapping into a RunConfig."""
    unknown = sorted(set(values) - set(Config.DEFAULTS))
    if unknown:
        raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}")
    v = {**Config.DEFAULTS, **{k: val for k, val in values.items()}}

    stopwords = frozenset()
    if not _blank(v['stopwords']):
        if not os.path.exists(v['stopwords']):
            raise FileNotFoundError(f"Stopword file does not exist: {v['stopwords']}")
        from utils.stopwords import load_stopwords
        stopwords = load_stopwords(v['stopwords'])

    popularity = _weight_sequence(v)
    base = {'weight_seq': popularity.variant, 'wc': popularity.c, 'wd': popularity.d, 'wr': popularity.r,
            'wb': popularity.b, 'gravity': popularity.G, 'wfloor': popularity.floor}
    blend = _weight_sequence(v, prefix='blend_', fallback=base)

    lda_baseline = _as_bool(v['lda_baseline'])
    scaling = v['lambda']
    if lda_baseline:
        scaling = 1.0
    elif _blank(scaling) or str(scaling).strip().lower() == 'auto':
        scaling = None

    sampler = SamplerConfig(
        topics=int(v['topics']),
        alpha=float(v['alpha']),
        beta=float(v['beta']),
        scaling_ratio=None if scaling is None else float(scaling),
        iterations=int(v['iterations']),
        burn_in=int(v['burn_in']),
        sample_lag=int(v['sample_lag']),
        rng_seed=int(v['seed']),
        log_every=int(v['log_every']),
        progress=_as_bool(v['progress']),
    )

    synthetic = SyntheticSpec(
        n_threads=int(v['synth_threads']),
        comments_per_thread=int(v['synth_comments']),
        k_true=int(v['synth_topics']),
        vocab_per_topic=int(v['synth_vocab_per_topic']),
        shared_noise_vocab=int(v['synth_noise_vocab']),
        noise_leaf_fraction=float(v['synth_noise_leaf_fraction']),
        topic_shift_prob=float(v['synth_topic_shift_prob']),
        noise_word_prob=float(v['synth_noise_word_prob']),
        tokens_per_comment=float(v['synth_tokens_per_comment']),
        branching_p=float(v['synth_branching_p']),
        rng_seed=int(v['seed']),
    )

    window_sizes = v['window_sizes']
    if isinstance(window_sizes, str):
        window_sizes = tuple(int(s) for s in window_sizes.split(',') if s.strip())

    return RunConfig(
        input_path=None if _blank(v['input']) else v['input'],
        input_format=v['input_format'],
        reference_path=None if _blank(v['reference']) else v['reference'],
        truth_path=None if _blank(v['truth']) else v['truth'],
        output_dir=v['output_dir'],
        model_dir=None if _blank(v['model_dir']) else v['model_dir'],
        stopwords_path=None if _blank(v['stopwords']) else v['stopwords'],
        tokenizer=TokenizerConfig(min_len=int(v['min_len']), stopwords=stopwords,
                                  use_default_stopwords=_as_bool(v['default_stopwords'])),
        min_count=int(v['min_count']),
        weights=popularity,
        blend_weights=blend,
        sampler=sampler,
        lda_baseline=lda_baseline,
        mode=v['mode'],
        thread_topics=int(v['thread_topics']),
        min_descendants=int(v['min_descendants']),
        top_t=int(v['top_t']),
        window_sizes=window_sizes,
        synthetic=synthetic,
        synth_reference_docs=int(v['synth_reference_docs']),
        log_level=str(v['log_level']),
        log_file=None if _blank(v['log_file']) else v['log_file'],
    )


def read_config_file(path) -> Dict[str, str]:
    """Parse a KEY=VALUE run-config file (dotenv syntax) without touching os.environ."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file does not exist: {path}")
    return {_normalize_key(k): v for k, v in dotenv_values(path).items() if v is not None}


def load_run_config(path=None, overrides: Optional[Dict] = None, environ: bool = True) -> RunConfig:
    """Merge built-in defaults < CSATM_* environment < config file < overrides, then validate."""
    values: Dict = {}
    if environ:
        values.update(Config.from_environ())
    if path:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[_normalize_key(key)] = value
    return build_run_config(values)


def run_config_dump(run_config: RunConfig) -> Dict:
    """JSON-ready settings with a stable stopword order"""
    data = run_config.model_dump(mode="json")
    data["tokenizer"]["stopwords"] = sorted(data["tokenizer"]["stopwords"])
    return data


def config_items(run_config: RunConfig) -> Iterable[Tuple[str, str]]:
    """Flattened view used to diff two configurations."""
    def walk(prefix, data):
        for key, value in sorted(data.items()):
            name = f"{prefix}{key}"
            if isinstance(value, dict):
                yield from walk(name + ".", value)
            else:
                yield name, repr(value)
    return walk("", run_config_dump(run_config))
