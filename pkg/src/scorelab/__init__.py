"""scorelab: score, decompose, and stress-test classifier-probability metrics.

The toolkit operates on probability matrices -- N samples by K classes,
each row a classifier's conditional class distribution -- and provides the
exponentiated split-protocol score, its batching-invariant log-scale
replacement, entropy/mutual-information decompositions, a 1-D Gaussian
testbed with an exact Bayes classifier, and a gradient-sign attack that
drives the score to its maximum from arbitrary starting samples.
"""

__version__ = "0.1.0"

from .attack import (
    AttackConfig,
    AttackResult,
    AttackState,
    AttackTrace,
    EmpiricalInit,
    FixedInit,
    UniformBoxInit,
    fgsm_step,
    generate_attacked_batch,
    optimize_sample,
    replay_generator,
)
from .classifiers import (
    MLPClassifier,
    SoftmaxLinear,
    SyntheticDataset,
    TrainConfig,
    gaussian_blobs,
    grad_class_prob,
    predict_proba,
    predict_proba_batch,
    train,
)
from .errors import (
    AttackError,
    InvalidInputError,
    LoadError,
    ScorelabError,
    TrainingError,
    UsageError,
)
from .experiments import (
    EntropyStudyResult,
    SplitStudyResult,
    entropy_study,
    split_study,
    top_classes,
)
from .formats import (
    RenormalizationWarning,
    load_matrix,
    load_model,
    save_matrix,
    save_model,
)
from .gaussian import (
    EmpiricalSampler,
    MixtureSpec,
    NormalSampler,
    Sampler1D,
    TestbedReport,
    TrueMixtureSampler,
    TwoPointSampler,
    UniformSampler,
    bayes_posterior,
    default_mixture,
    posterior_matrix,
    score_of_sampler,
    score_ordering_demo,
)
from .metrics import (
    ClassDistribution,
    EntropyReport,
    ProbMatrix,
    ScoreReport,
    SplitSpec,
    bounds_check,
    entropy,
    entropy_decomposition,
    improved_score,
    inception_score,
    kl_divergence,
    marginal_of,
)
