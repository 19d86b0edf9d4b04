"""Multi-domain Chinese word segmentation with CRF models.

High-level use goes through :class:`CrfSegmenter` (an sklearn-style
estimator) or the ``segkit`` command line.  The submodules expose the full
pipeline: corpus parsing and tag codecs (corpus), tries (lexicon), feature
templates (features), the CRF itself (crf), online training (trainer),
evaluation (metrics), and model files (modelio).
"""

from .corpus import (
    NormalizationConfig,
    ParsedSentence,
    Segmentation,
    Sentence,
    TagScheme,
    normalize,
    read_segmented_file,
)
from .crf import CrfModel, segment, segment_words
from .errors import SegkitError
from .estimator import CrfSegmenter
from .features import FeatureIndex, TemplateConfig
from .lexicon import Lexicon, load_wordlist
from .metrics import EvalResult, aggregate_f1, score_files, score_segmentations
from .modelio import dump_text, load, resolve_model, save
from .trainer import TrainConfig, TrainReport, train

__version__ = "0.1.0"

__all__ = [
    "CrfModel",
    "CrfSegmenter",
    "EvalResult",
    "FeatureIndex",
    "Lexicon",
    "NormalizationConfig",
    "ParsedSentence",
    "SegkitError",
    "Segmentation",
    "Sentence",
    "TagScheme",
    "TemplateConfig",
    "TrainConfig",
    "TrainReport",
    "aggregate_f1",
    "dump_text",
    "load",
    "load_wordlist",
    "normalize",
    "read_segmented_file",
    "resolve_model",
    "save",
    "score_files",
    "score_segmentations",
    "segment",
    "segment_words",
    "train",
    "__version__",
]
