"""Depression-severity regression from speech with conventional acoustic features.

The pipeline runs loudness normalization and log-MMSE enhancement, frame-level
descriptor extraction with statistical functionals, z-scoring, mRMR selection,
three regressors (RBF SVR, random forest, feedforward network), subject-independent
stratified cross-validation, and a stage-timing cost report.
"""

__version__ = "0.1.0"
