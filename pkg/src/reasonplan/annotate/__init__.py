from .dataset import (
    dataset_stats,
    generate_dataset,
    load_dataset,
    records_from_rollout,
)
from .meta_actions import (
    LATERAL_ACTIONS,
    LONGITUDINAL_ACTIONS,
    MetaAction,
    derive_meta_actions,
    low_pass,
)
from .records import (
    STAGE_CODES,
    STAGE_TITLES,
    ReasoningRecord,
    decode_frame,
    encode_frame,
    serialize_reasoning,
    serialize_record,
    trajectory_line,
)
from .reports import (
    CriticalObject,
    CriticalObjectReport,
    OffMapError,
    SceneNarration,
    SignEntry,
    SignReport,
    describe_scene,
    identify_critical_objects,
    report_signs,
    signed_projection,
)

__all__ = [
    "CriticalObject", "CriticalObjectReport", "LATERAL_ACTIONS",
    "LONGITUDINAL_ACTIONS", "MetaAction", "OffMapError", "ReasoningRecord",
    "STAGE_CODES", "STAGE_TITLES", "SceneNarration", "SignEntry", "SignReport",
    "dataset_stats", "decode_frame", "derive_meta_actions", "describe_scene",
    "encode_frame", "generate_dataset", "identify_critical_objects",
    "load_dataset", "low_pass", "records_from_rollout", "report_signs",
    "serialize_reasoning", "serialize_record", "signed_projection",
    "trajectory_line",
]
