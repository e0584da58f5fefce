"""Graph Wiener filtering and graph-filter transfer under topology changes."""

from .errors import GFTransferError
from .graphs import (
    Graph,
    NodeMapping,
    SpectralBasis,
    build_graph,
    gen_er,
    gen_rs,
    gft,
    igft,
    kernel_weights,
    load_graph,
    perturb_edges,
    perturb_nodes,
    save_graph,
    spectral_decompose,
    uniform_weights,
)
from .gwss import GwssModel, covariance, psd_current, psd_historical, sample
from .recovery import (
    LinearEstimator,
    ObservationModel,
    lmmse,
    make_mask,
    mse,
    observe,
    recover,
)
from .spectral_fit import (
    ArmaFit,
    ArmaParams,
    PsdEstimate,
    arma_eval,
    covariance_from_arma,
    fit_arma,
    nonparam_psd,
    vandermonde,
)
from .density_ratio import (
    DensityRatioModel,
    KernelBasis,
    build_basis,
    eval_ratio,
    fit_ratio,
    gaussian_ratio_oracle,
)
from .transfer import (
    PipelineResult,
    RatioConfig,
    TransferScenario,
    baseline_transfer,
    drw_transfer,
    make_scenario,
    weighted_psd_nodechange,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    TrialResult,
    build_trial,
    dump_recovery,
    run_experiment,
    run_trial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
