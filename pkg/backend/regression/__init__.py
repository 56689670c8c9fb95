from .ridge import (
    DEFAULT_SIGMA,
    RidgeModel,
    SingularSystemError,
    bootstrap_committee,
    committee_predictions,
    fit_ridge,
    predict,
)
