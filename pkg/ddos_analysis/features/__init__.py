from ddos_analysis.features.general import (
    LABEL_COLUMN,
    OWN_VOLUME,
    ArchitectureKind,
    build_general,
    feature_columns,
    onehot_column,
    select_features,
    volume_column,
)
from ddos_analysis.features.views import (
    TrainingView,
    class_weights,
    concat_views,
    load_view,
    save_view,
    scale_views,
    split_days,
    window,
)

__all__ = [
    "LABEL_COLUMN",
    "OWN_VOLUME",
    "ArchitectureKind",
    "TrainingView",
    "build_general",
    "class_weights",
    "concat_views",
    "feature_columns",
    "load_view",
    "onehot_column",
    "save_view",
    "scale_views",
    "select_features",
    "split_days",
    "volume_column",
    "window",
]
