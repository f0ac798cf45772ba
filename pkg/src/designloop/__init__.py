"""Interactive design-space exploration with a learned user-preference model.

The package couples a procedural design catalog with modality evaluators,
an RBF-SVM preference model stacked by logistic regression, explore/exploit
proposal strategies, a round-based session loop, a simulated-user benchmark,
and an HTTP service for live sessions.
"""

from .catalog import (
    Catalog,
    CatalogError,
    Design,
    DesignParams,
    generate_catalog,
    load_catalog,
    render_design,
    save_catalog,
)
from .imaging import (
    ColorPalette,
    EmbeddingStore,
    ModalityEmbedding,
    NoForegroundError,
    aspect_ratio,
    channel_dominance,
    color_descriptor,
    compute_mask,
    extract_palette,
    shape_descriptor,
)
from .preference import (
    ColdStartError,
    PreferenceModel,
    ThompsonEnsemble,
    ensemble_update,
    predict,
    predict_ids,
    train_preference,
)
from .proposer import ProposalContext, ProposalRequest, StrategyMix, propose
from .session import (
    ReplayError,
    RoundRecord,
    SessionError,
    SessionState,
    batch_auc,
    batch_log_loss,
    create_session,
    end_session,
    replay_transcript,
    submit_feedback,
)
from .simbench import (
    CalibrationError,
    ConceptTask,
    ExperimentConfig,
    MetricsTable,
    RunLabels,
    TASKS,
    assign_labels,
    calibrate_thresholds,
    concept_score,
    run_experiment,
    simulated_select,
)
from .svm import DegenerateDataError, SvmModel, kernel_width, train_svm

__version__ = "0.1.0"
