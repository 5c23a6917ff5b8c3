# app/modules/evaluation/__init__.py
from .schemas import EVAL_SCALES, ConfusionMatrix, EvalConfig, EvalReport, IouReport
from .metrics import accumulate, format_report, miou, pixel_accuracy
from .inference import Prediction, evaluate_dataset, infer_multiscale_flip, predict_probabilities
from .export import export_attention, min_max_gray, to_gray, weights_csv

__all__ = [
    "EVAL_SCALES",
    "ConfusionMatrix",
    "EvalConfig",
    "EvalReport",
    "IouReport",
    "accumulate",
    "format_report",
    "miou",
    "pixel_accuracy",
    "Prediction",
    "evaluate_dataset",
    "infer_multiscale_flip",
    "predict_probabilities",
    "export_attention",
    "min_max_gray",
    "to_gray",
    "weights_csv",
]
