"""MS lesion detection pipeline: superpixel wavelet features + kernel SVM."""

from ._core import (
    FeatureMatrix,
    LabelMap,
    PcaModel,
    PipelineConfig,
    SubbandSet,
    SvmModel,
    dwt2,
    evaluate,
    extract_brain,
    featurize_case,
    generate_phantom,
    idwt2,
    kernel_table,
    load_config,
    load_features_csv,
    load_image,
    make_dataset,
    pca_fit,
    pca_inverse,
    pca_transform,
    prune_superpixels,
    region_moments,
    render_config,
    run_pipeline,
    save_features_csv,
    save_pgm,
    segment,
    svm_decision,
    svm_predict,
    svm_train,
)

__all__ = [
    "FeatureMatrix",
    "LabelMap",
    "PcaModel",
    "PipelineConfig",
    "SubbandSet",
    "SvmModel",
    "dwt2",
    "evaluate",
    "extract_brain",
    "featurize_case",
    "generate_phantom",
    "idwt2",
    "kernel_table",
    "load_config",
    "load_features_csv",
    "load_image",
    "make_dataset",
    "pca_fit",
    "pca_inverse",
    "pca_transform",
    "prune_superpixels",
    "region_moments",
    "render_config",
    "run_pipeline",
    "save_features_csv",
    "save_pgm",
    "segment",
    "svm_decision",
    "svm_predict",
    "svm_train",
]
