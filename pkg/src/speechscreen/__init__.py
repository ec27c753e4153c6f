"""Speech-based cognitive-decline screening pipeline.

Feature extraction (pause timing, transcript statistics, pooled audio
embeddings) over task-labelled recordings, per-(feature, task) model
training, voting fusion, and a repeated stratified holdout harness.
"""

from .audio import AudioBuffer, frame_energies, read_wav, write_wav
from .errors import PipelineError
from .evaluation import (
    BootstrapReport,
    SplitPlan,
    bootstrap_evaluate,
    confusion_matrix,
    macro_f1,
    make_splits,
    rmse,
)
from .ensemble import (
    CandidateEntry,
    EnsembleSpec,
    VoteMode,
    average_vote,
    majority_vote,
    search_combination,
)
from .manifest import (
    DatasetManifest,
    Diagnosis,
    FeatureVector,
    Gender,
    RecordingEntry,
    SubjectRecord,
    TaskKind,
    Variant,
    parse_manifest,
)
from .vad import SpeechSegment, VadConfig, detect_speech

__version__ = "0.1.0"
