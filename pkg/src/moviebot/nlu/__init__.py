from .corpus import (
    CorpusRecord,
    Grammar,
    GrammarCoverageError,
    LabeledCorpus,
    fill_template,
    generate_corpus,
    spans_from_tags,
)
from .crf import (
    CrfExample,
    CrfModel,
    CrfTrainConfig,
    EmptyCorpusError,
    EmptySequenceError,
    InfeasibleConstraintError,
    InvalidGoldError,
    bio_tags,
    crf_forward_logZ,
    crf_loglik_and_grad,
    crf_train,
    crf_viterbi,
    default_constraints,
    load_crf,
    save_crf,
    score_path,
)
from .evaluate import NluReport, evaluate_nlu
from .features import HASH_DIM, FeatureEncoder, Lexicons, feature_hash
from .joint import CrfEngine, joint_decode
from .rules import NLUOutput, RuleBasedEngine, extract_slots, load_patterns
from .tokenizer import tokenize, tokenize_with_case
